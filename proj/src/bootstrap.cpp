#include "dgof/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "dgof/process.hpp"
#include "dgof/rng.hpp"
#include "dgof/transform.hpp"

namespace dgof {

namespace {

void run_parallel(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string r_name(int dim, int m) {
  const std::string base = dim == 1 ? "R1" : "R2";
  return m == 1 ? base : base + "M(" + std::to_string(m) + ")";
}

// order statistic at the empirical (1 - alpha) percentile
double upper_quantile(std::vector<double> v, double alpha) {
  if (v.empty()) throw NumericError("no replicates to take a quantile of");
  std::sort(v.begin(), v.end());
  const int n = static_cast<int>(v.size());
  int k = static_cast<int>(std::ceil((1.0 - alpha) * n));
  k = std::min(std::max(k, 1), n);
  return v[static_cast<std::size_t>(k) - 1];
}

double init_lag_for(const Model& model, const ObservationSeries& series) {
  // ordered: lag on the first observed category; Poisson AR: the first
  // observed count
  return model.ordered_spec() ? static_cast<double>(series.y[0])
                              : static_cast<double>(series.y[0] - 1);
}

ObservationSeries simulate_replicate(const Model& model,
                                     const Eigen::VectorXd& theta,
                                     const ObservationSeries& series,
                                     int burnin, Rng& rng) {
  const int T = series.length();
  const double init = init_lag_for(model, series);
  if (burnin <= 0) return model.simulate(theta, series.x, init, rng);
  Eigen::MatrixXd x_ext(T + burnin, series.x.cols());
  for (int t = 0; t < burnin; ++t) x_ext.row(t) = series.x.row(0);
  x_ext.bottomRows(T) = series.x;
  ObservationSeries full = model.simulate(theta, x_ext, init, rng);
  ObservationSeries out;
  out.y = full.y.tail(T);
  out.x = series.x;
  out.support_K = full.support_K;
  return out;
}

}  // namespace

StatPlan StatPlan::full() {
  StatPlan plan;
  plan.r2_ms = {50, 25, 1};
  plan.r1_ms = {50, 25, 1};
  plan.z = true;
  return plan;
}

StatPlan StatPlan::s_only() {
  StatPlan plan;
  return plan;
}

StatPlan StatPlan::sr_plain() {
  StatPlan plan;
  plan.r2_ms = {1};
  plan.r1_ms = {1};
  return plan;
}

std::vector<std::string> stat_names(const StatPlan& plan) {
  std::vector<std::string> names;
  const auto push = [&](const std::string& proc) {
    if (plan.cvm) names.push_back(proc + ":CvM");
    if (plan.ks) names.push_back(proc + ":KS");
  };
  if (plan.s2) push("S2");
  for (int m : plan.r2_ms) push(r_name(2, m));
  if (plan.s1) push("S1");
  for (int m : plan.r1_ms) push(r_name(1, m));
  if (plan.z) push("Z");
  return names;
}

Eigen::VectorXd compute_stats(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series,
                              const StatPlan& plan, Rng& rng) {
  if (!plan.ks && !plan.cvm)
    throw ValidationError("stat plan selects no norms");
  const TransformSeries ts = TransformSeries::from_model(model, theta, series);
  const int T = ts.length();

  // one noise matrix per distinct M, shared between R1M and R2M
  std::vector<int> ms;
  for (int m : plan.r2_ms) ms.push_back(m);
  for (int m : plan.r1_ms) ms.push_back(m);
  std::sort(ms.begin(), ms.end(), std::greater<int>());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<NoiseMatrix> noise;
  noise.reserve(ms.size());
  for (int m : ms) noise.push_back(NoiseMatrix::draw(T, m, rng.next_u64()));
  const auto noise_for = [&](int m) -> const NoiseMatrix& {
    for (std::size_t i = 0; i < ms.size(); ++i)
      if (ms[i] == m) return noise[i];
    throw ValidationError("no noise drawn for M");
  };

  std::vector<double> out;
  const auto push = [&](double cvm, double ks) {
    if (plan.cvm) out.push_back(cvm);
    if (plan.ks) out.push_back(ks);
  };

  if (plan.s2) {
    const Bilinear2D s2 = s2_process(ts);
    push(cvm_2d(s2, plan.stat_opts).value, ks_2d(s2).value);
  }
  for (int m : plan.r2_ms) {
    const StepField2D r2 = r2m_process(ts, noise_for(m));
    push(cvm_2d(r2, plan.stat_opts).value, ks_2d(r2).value);
  }
  if (plan.s1) {
    const Process1D s1 = s1_process(ts);
    push(cvm_1d(s1).value, ks_1d(s1).value);
  }
  for (int m : plan.r1_ms) {
    const Process1D r1 = r1m_process(ts, noise_for(m));
    push(cvm_1d(r1).value, ks_1d(r1).value);
  }
  if (plan.z) {
    const OrderedChoiceSpec* spec = model.ordered_spec();
    if (!spec)
      throw ValidationError("marked-process statistic needs an ordered model");
    const MarkedProcess mp = z_marked(*spec, theta, series);
    push(mp.pooled_cvm(), mp.pooled_ks());
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<int>(out.size()));
}

BootstrapResult parametric_bootstrap(const Model& model,
                                     const ObservationSeries& series,
                                     const StatPlan& plan,
                                     const BootstrapOptions& options,
                                     std::uint64_t seed) {
  if (options.B < 19) throw ValidationError("bootstrap needs B >= 19");
  BootstrapResult result;
  result.names = stat_names(plan);
  result.seed = seed;
  result.B = options.B;
  result.alpha = options.alpha;

  // step 1: fit and observed statistics
  result.fit = fit_mle(model, series, options.fit);
  Rng rng_obs(mix_seed(seed, 0));
  result.observed = compute_stats(model, result.fit.theta, series, plan, rng_obs);

  const int S = static_cast<int>(result.names.size());
  Eigen::MatrixXd reps(options.B, S);
  std::vector<char> ok(static_cast<std::size_t>(options.B), 0);

  // steps 2-3, replicated B times
  run_parallel(options.B, options.threads, [&](int b) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(b) + 1));
    try {
      const ObservationSeries sim = simulate_replicate(
          model, result.fit.theta, series, options.burnin, rng);
      const FitResult refit = fit_mle(model, sim, options.fit);
      if (!refit.converged) return;  // dropped and counted
      reps.row(b) = compute_stats(model, refit.theta, sim, plan, rng);
      ok[static_cast<std::size_t>(b)] = 1;
    } catch (const NumericError&) {
      // dropped and counted
    }
  });

  int kept = 0;
  for (int b = 0; b < options.B; ++b)
    if (ok[static_cast<std::size_t>(b)]) ++kept;
  result.dropped = options.B - kept;
  result.reliable =
      result.fit.converged &&
      result.dropped <= options.max_drop_frac * options.B;
  if (kept == 0) throw NumericError("all bootstrap replicates failed");

  result.replicates.resize(kept, S);
  int row = 0;
  for (int b = 0; b < options.B; ++b)
    if (ok[static_cast<std::size_t>(b)]) result.replicates.row(row++) = reps.row(b);

  // steps 4-5: percentiles and p-values
  result.critical.resize(S);
  result.pvalue.resize(S);
  for (int s = 0; s < S; ++s) {
    std::vector<double> col(static_cast<std::size_t>(kept));
    for (int b = 0; b < kept; ++b) col[static_cast<std::size_t>(b)] = result.replicates(b, s);
    result.critical[s] = upper_quantile(col, options.alpha);
    int geq = 0;
    for (double v : col)
      if (v >= result.observed[s]) ++geq;
    result.pvalue[s] = (1.0 + geq) / (kept + 1.0);
  }
  return result;
}

WarpResult warp_mc(const Scenario& scenario, const StatPlan& plan, int R,
                   double alpha, std::uint64_t seed, int threads) {
  if (R < 1) throw ValidationError("warp_mc needs R >= 1");
  WarpResult result;
  result.names = stat_names(plan);
  result.seed = seed;
  result.R = R;
  result.alpha = alpha;

  const int S = static_cast<int>(result.names.size());
  Eigen::MatrixXd observed(R, S);
  Eigen::MatrixXd pooled(R, S);
  std::vector<char> ok(static_cast<std::size_t>(R), 0);

  run_parallel(R, threads, [&](int r) {
    const std::uint64_t sub = mix_seed(seed, static_cast<std::uint64_t>(r));
    try {
      // draw covariates and data from the truth, with warm-up
      Rng rng_x(mix_seed(sub, 1));
      const int Tfull = scenario.T + scenario.burnin;
      const Eigen::MatrixXd x_full = scenario.xgen.draw(Tfull, rng_x);
      Rng rng_y(mix_seed(sub, 2));
      const ObservationSeries sim_full = scenario.truth->simulate(
          scenario.theta_truth, x_full, scenario.init_lag, rng_y);
      ObservationSeries data;
      data.y = sim_full.y.tail(scenario.T);
      data.x = x_full.bottomRows(scenario.T);
      data.support_K = sim_full.support_K;

      // fit the null and compute observed statistics
      const FitResult fit = fit_mle(*scenario.null_model, data);
      if (!fit.converged) return;
      Rng rng_s(mix_seed(sub, 3));
      observed.row(r) =
          compute_stats(*scenario.null_model, fit.theta, data, plan, rng_s);

      // one bootstrap draw from the fitted null
      Rng rng_b(mix_seed(sub, 4));
      const ObservationSeries boot =
          simulate_replicate(*scenario.null_model, fit.theta, data, 0, rng_b);
      const FitResult refit = fit_mle(*scenario.null_model, boot);
      if (!refit.converged) return;
      pooled.row(r) =
          compute_stats(*scenario.null_model, refit.theta, boot, plan, rng_b);
      ok[static_cast<std::size_t>(r)] = 1;
    } catch (const NumericError&) {
      // replication dropped and counted
    }
  });

  int kept = 0;
  for (int r = 0; r < R; ++r)
    if (ok[static_cast<std::size_t>(r)]) ++kept;
  result.failures = R - kept;
  if (kept == 0) throw NumericError("all Monte Carlo replications failed");

  result.rejection_rate.resize(S);
  result.pooled_critical.resize(S);
  for (int s = 0; s < S; ++s) {
    std::vector<double> boot_col;
    boot_col.reserve(static_cast<std::size_t>(kept));
    for (int r = 0; r < R; ++r)
      if (ok[static_cast<std::size_t>(r)]) boot_col.push_back(pooled(r, s));
    const double crit = upper_quantile(boot_col, alpha);
    result.pooled_critical[s] = crit;
    int rejections = 0;
    for (int r = 0; r < R; ++r)
      if (ok[static_cast<std::size_t>(r)] && observed(r, s) > crit) ++rejections;
    result.rejection_rate[s] = static_cast<double>(rejections) / kept;
  }
  return result;
}

}  // namespace dgof
