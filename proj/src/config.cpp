#include "dgof/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dgof {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

bool parse_bool(const std::string& s) {
  const std::string v = lower(s);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ValidationError("config: cannot parse boolean '" + s + "'");
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  RunConfig config;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "model") {
      if (key == "family") config.family = lower(value);
      else if (key == "link") config.link = lower(value);
      else if (key == "k") config.K = std::stoi(value);
      else if (key == "dynamic") config.dynamic = parse_bool(value);
      else if (key == "lambda0") config.lambda0 = std::stod(value);
      else if (key == "y0") config.y0 = std::stod(value);
      else if (key == "theta") config.theta = split_doubles(value);
      else throw ValidationError("config: unknown [model] key '" + key + "'");
    } else if (section == "data") {
      if (key == "path") config.data_path = value;
      else if (key == "y") config.y_column = value;
      else if (key == "x") config.x_columns = split_list(value);
      else if (key == "discretize") config.discretize_column = value;
      else if (key == "thresholds") config.thresholds = split_doubles(value);
      else throw ValidationError("config: unknown [data] key '" + key + "'");
    } else if (section == "test") {
      if (key == "processes") config.processes = split_list(value);
      else if (key == "norms") {
        config.norm_ks = false;
        config.norm_cvm = false;
        for (const auto& n : split_list(value)) {
          const std::string v = lower(n);
          if (v == "ks") config.norm_ks = true;
          else if (v == "cvm") config.norm_cvm = true;
          else throw ValidationError("config: unknown norm '" + n + "'");
        }
      } else if (key == "b") config.B = std::stoi(value);
      else if (key == "alpha") config.alpha = std::stod(value);
      else if (key == "burnin") config.burnin = std::stoi(value);
      else throw ValidationError("config: unknown [test] key '" + key + "'");
    } else if (section == "mc") {
      if (key == "scenarios") {
        config.scenarios.clear();
        for (auto& s : split_list(value)) config.scenarios.push_back(lower(s));
      } else if (key == "r") config.R = std::stoi(value);
      else if (key == "t") config.T = std::stoi(value);
      else throw ValidationError("config: unknown [mc] key '" + key + "'");
    } else if (section == "simulate") {
      if (key == "t") config.sim_T = std::stoi(value);
      else throw ValidationError("config: unknown [simulate] key '" + key + "'");
    } else if (section == "output") {
      if (key == "dir") config.out_dir = value;
      else throw ValidationError("config: unknown [output] key '" + key + "'");
    } else {
      throw ValidationError("config: unknown section [" + section + "]");
    }
  }
  return config;
}

std::unique_ptr<Model> model_from_config(const RunConfig& config, int data_K,
                                         int data_p) {
  if (config.family == "ordered") {
    OrderedChoiceSpec spec;
    if (config.link == "probit") spec.link = OrderedChoiceSpec::Link::probit;
    else if (config.link == "logit") spec.link = OrderedChoiceSpec::Link::logit;
    else throw ValidationError("ordered model link must be probit or logit");
    spec.K = config.K > 0 ? config.K : data_K;
    if (spec.K < 2) throw ValidationError("ordered model needs K >= 2");
    spec.dynamic = config.dynamic;
    spec.p = data_p;
    return make_model(spec);
  }
  if (config.family == "poisson") {
    PoissonSpec spec;
    if (config.link == "exp-static") spec.link = PoissonSpec::Link::exp_static;
    else if (config.link == "identity-ar")
      spec.link = PoissonSpec::Link::identity_ar;
    else if (config.link == "log-ar") spec.link = PoissonSpec::Link::log_ar;
    else
      throw ValidationError(
          "poisson link must be exp-static, identity-ar or log-ar");
    spec.p = data_p;
    spec.lambda0 = config.lambda0;
    spec.y0 = config.y0;
    return make_model(spec);
  }
  throw ValidationError("unknown model family: " + config.family);
}

StatPlan plan_from_config(const RunConfig& config, bool ordered_model) {
  StatPlan plan;
  plan.ks = config.norm_ks;
  plan.cvm = config.norm_cvm;
  if (config.processes.empty()) {
    plan = StatPlan::full();
    plan.ks = config.norm_ks;
    plan.cvm = config.norm_cvm;
    plan.z = ordered_model;
    return plan;
  }
  plan.s1 = plan.s2 = plan.z = false;
  plan.r1_ms.clear();
  plan.r2_ms.clear();
  for (const auto& raw : config.processes) {
    std::string p = lower(raw);
    p.erase(std::remove_if(p.begin(), p.end(),
                           [](char c) { return c == '(' || c == ')' || c == ' '; }),
            p.end());
    if (p == "s1") plan.s1 = true;
    else if (p == "s2") plan.s2 = true;
    else if (p == "z") plan.z = true;
    else if (p == "r1") plan.r1_ms.push_back(1);
    else if (p == "r2") plan.r2_ms.push_back(1);
    else if (p.rfind("r1m", 0) == 0) plan.r1_ms.push_back(std::stoi(p.substr(3)));
    else if (p.rfind("r2m", 0) == 0) plan.r2_ms.push_back(std::stoi(p.substr(3)));
    else throw ValidationError("unknown process in stat plan: " + raw);
  }
  if (plan.z && !ordered_model)
    throw ValidationError("Z statistic requires an ordered model");
  return plan;
}

}  // namespace dgof
