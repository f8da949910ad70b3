#include "gcid/onoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gcid/errors.hpp"

namespace gcid {
namespace {

constexpr std::size_t kMaxBruteForceEpochs = 12;

// exp(i y) - 1 without cancellation in the real part.
Complex expm1_i(double y) {
  const double s = std::sin(0.5 * y);
  return {-2.0 * s * s, std::sin(y)};
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

std::vector<double> default_thetas() {
  std::vector<double> t;
  for (int k = -50; k <= 50; ++k) t.push_back(0.1 * k);
  return t;
}

double relative_error(double observed, double expected) {
  return std::abs(observed - expected) / std::max(std::abs(expected), 1e-300);
}

// Visits every subset of {0..m-1} with at least two elements, indices ascending.
template <class Visit>
void for_each_subset(std::size_t m, Visit&& visit) {
  if (m > kMaxBruteForceEpochs)
    throw PreconditionError("brute-force subset sums are limited to 12 epochs");
  std::vector<std::size_t> idx;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) < 2) continue;
    idx.clear();
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) idx.push_back(k);
    visit(std::span<const std::size_t>(idx));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Single source

void OnOffSource::validate() const {
  if (!positive_finite(lambda) || !positive_finite(mu) || !positive_finite(r))
    throw PreconditionError("ON/OFF source needs positive lambda, mu and r");
}

Eigen::Matrix2d transition_matrix(const OnOffSource& src, double t) {
  src.validate();
  if (!(t >= 0.0)) throw PreconditionError("transition time must be nonnegative");
  const double a = src.alpha();
  const double e = std::exp(-a * t);
  const double on = src.lambda / a;
  const double off = src.mu / a;
  Eigen::Matrix2d p;
  p << off + e * on, on - e * on,
       off - e * off, on + e * off;
  return p;
}

std::vector<double> simulate_source_path(const OnOffSource& src, const TimeGrid& grid, Rng& rng) {
  src.validate();
  std::vector<double> out(grid.size());
  bool on = rng.uniform() < src.pi();
  out[0] = on ? src.r : 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const Eigen::Matrix2d p = transition_matrix(src, grid[k] - grid[k - 1]);
    on = rng.uniform() < (on ? p(1, 1) : p(0, 1));
    out[k] = on ? src.r : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arrays

OnOffArraySpec OnOffArraySpec::explicit_rows(
    std::map<std::size_t, std::vector<std::pair<double, double>>> rows, double mu) {
  if (!positive_finite(mu)) throw PreconditionError("array ON rate mu must be positive");
  for (const auto& [n, row] : rows) {
    if (row.size() != n) throw PreconditionError("row " + std::to_string(n) + " must have n entries");
    for (const auto& [lambda, r] : row)
      if (!positive_finite(lambda) || !positive_finite(r))
        throw PreconditionError("array entries lambda_nj and r_nj must be positive");
  }
  OnOffArraySpec spec;
  spec.mu_ = mu;
  spec.rows_ = std::move(rows);
  return spec;
}

OnOffArraySpec OnOffArraySpec::power_example(double alpha, double b, double mu) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(b > 0.0 && b < 1.0))
    throw PreconditionError("power example needs alpha and b in (0, 1)");
  if (!positive_finite(mu)) throw PreconditionError("array ON rate mu must be positive");
  OnOffArraySpec spec;
  spec.mu_ = mu;
  spec.power_ = std::make_pair(alpha, b);
  return spec;
}

bool OnOffArraySpec::has_row(std::size_t n) const {
  return n >= 1 && (power_ || rows_.count(n) > 0);
}

OnOffRow OnOffArraySpec::row(std::size_t n) const {
  if (!has_row(n)) throw PreconditionError("array has no row " + std::to_string(n));
  OnOffRow out{{}, {}, mu_};
  if (power_) {
    const auto [alpha, b] = *power_;
    const double scale = std::pow(static_cast<double>(n), alpha);
    out.lambda.assign(n, 1.0 / scale);
    out.r.resize(n);
    for (std::size_t j = 1; j <= n; ++j) out.r[j - 1] = std::pow(b, static_cast<double>(j) / scale);
    return out;
  }
  for (const auto& [lambda, r] : rows_.at(n)) {
    out.lambda.push_back(lambda);
    out.r.push_back(r);
  }
  return out;
}

std::pair<double, double> OnOffArraySpec::power_parameters() const {
  if (!power_) throw PreconditionError("array is not the power example");
  return *power_;
}

LevyMeasure OnOffArraySpec::power_limit_measure() const {
  const double b = power_parameters().second;
  return LevyMeasure::inverse_x(1.0 / std::log(1.0 / b), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Empirical measure

EmpiricalLevyMeasure::EmpiricalLevyMeasure(const OnOffRow& row) : lambda_(row.lambda), r_(row.r) {
  if (lambda_.size() != r_.size()) throw PreconditionError("row arrays differ in length");
}

double EmpiricalLevyMeasure::tail(double x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j] >= x) s += lambda_[j];
  return s;
}

double EmpiricalLevyMeasure::first_moment_tail(double x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j] >= x) s += lambda_[j] * r_[j];
  return s;
}

double EmpiricalLevyMeasure::small_jump_sum(double eps) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j] <= eps) s += lambda_[j] * r_[j];
  return s;
}

double EmpiricalLevyMeasure::power_sum(double p) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j) s += lambda_[j] * std::pow(r_[j], p);
  return s;
}

Complex EmpiricalLevyMeasure::cf_sum(double theta) const {
  Complex s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j) s += lambda_[j] * expm1_i(theta * r_[j]);
  return s;
}

double EmpiricalLevyMeasure::c2_sum(double eps, double mu) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j] <= eps) s += lambda_[j] * r_[j] / (lambda_[j] + mu);
  return s;
}

double EmpiricalLevyMeasure::c1_sum(double x, double mu) const {
  double s = 0.0;
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j] >= x) s += lambda_[j] / (lambda_[j] + mu);
  return s;
}

double EmpiricalLevyMeasure::max_lambda() const {
  return lambda_.empty() ? 0.0 : *std::max_element(lambda_.begin(), lambda_.end());
}

LevyMeasure EmpiricalLevyMeasure::as_measure() const { return LevyMeasure::atomic(r_, lambda_); }

// ---------------------------------------------------------------------------
// Superposition

SuperpositionSampler::SuperpositionSampler(const OnOffRow& row, const TimeGrid& grid)
    : sources_(row.size()), epochs_(grid.size()), r_(row.r) {
  const std::size_t gaps = epochs_ - 1;
  pi_.resize(sources_);
  p01_.resize(sources_ * gaps);
  p11_.resize(sources_ * gaps);
  for (std::size_t j = 0; j < sources_; ++j) {
    const OnOffSource src{row.lambda[j], row.mu, row.r[j]};
    src.validate();
    pi_[j] = src.pi();
    for (std::size_t g = 0; g < gaps; ++g) {
      const Eigen::Matrix2d p = transition_matrix(src, grid[g + 1] - grid[g]);
      p01_[j * gaps + g] = p(0, 1);
      p11_[j * gaps + g] = p(1, 1);
    }
  }
}

void SuperpositionSampler::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != epochs_) throw PreconditionError("output length must match the grid size");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t gaps = epochs_ - 1;
  for (std::size_t j = 0; j < sources_; ++j) {
    bool on = rng.uniform() < pi_[j];
    if (on) out[0] += r_[j];
    const double* p01 = p01_.data() + j * gaps;
    const double* p11 = p11_.data() + j * gaps;
    for (std::size_t g = 0; g < gaps; ++g) {
      on = rng.uniform() < (on ? p11[g] : p01[g]);
      if (on) out[g + 1] += r_[j];
    }
  }
}

std::vector<double> superpose(const OnOffRow& row, const TimeGrid& grid, Rng& rng) {
  std::vector<double> out(grid.size());
  SuperpositionSampler(row, grid).sample(rng, out);
  return out;
}

Complex superposition_cf(const OnOffRow& row, const TimeGrid& grid, std::span<const double> theta) {
  if (theta.size() != grid.size()) throw PreconditionError("theta length must match the grid size");
  Complex total = 1.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const OnOffSource src{row.lambda[j], row.mu, row.r[j]};
    Complex off = 1.0 - src.pi();
    Complex on = src.pi() * std::polar(1.0, theta[0] * src.r);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const Eigen::Matrix2d p = transition_matrix(src, grid[k] - grid[k - 1]);
      const Complex next_off = off * p(0, 0) + on * p(1, 0);
      const Complex next_on = (off * p(0, 1) + on * p(1, 1)) * std::polar(1.0, theta[k] * src.r);
      off = next_off;
      on = next_on;
    }
    total *= off + on;
  }
  return total;
}

LevyExponent limit_exponent(const LevyMeasure& nu, double mu) {
  if (!positive_finite(mu)) throw PreconditionError("ON rate mu must be positive");
  return LevyExponent::spectrally_positive(nu.scaled(1.0 / mu));
}

WeightMatrix espc_product_weights(double mu, const TimeGrid& grid) {
  const std::size_t n = grid.size();
  WeightMatrix w(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double left = u == 0 ? 1.0 : -std::expm1(-mu * (grid[u] - grid[u - 1]));
    for (std::size_t v = u; v < n; ++v) {
      const double right = v + 1 == n ? 1.0 : -std::expm1(-mu * (grid[v + 1] - grid[v]));
      w(u, v) = left * std::exp(-mu * (grid[v] - grid[u])) * right;
    }
  }
  return w;
}

Complex espc_log_cf(const LevyExponent& limit_law, double mu, const TimeGrid& grid,
                    std::span<const double> theta) {
  return log_cf(GcidProcess{limit_law, CorrelationStructure::exponential(mu)}, grid, theta);
}

Complex espc_log_cf(const LevyMeasure& nu, double mu, const TimeGrid& grid,
                    std::span<const double> theta) {
  return espc_log_cf(limit_exponent(nu, mu), mu, grid, theta);
}

// ---------------------------------------------------------------------------
// Assumption checks

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

nlohmann::json AssumptionReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) j.push_back({{"name", c.name}, {"pass", c.pass}, {"observed", c.observed}});
  return {{"checks", j}, {"all_pass", all_pass()}};
}

std::pair<double, double> uan_check(const OnOffRow& row, std::span<const double> thetas) {
  double worst = 0.0;
  double max_lambda = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double pi = row.lambda[j] / (row.lambda[j] + row.mu);
    max_lambda = std::max(max_lambda, row.lambda[j]);
    for (double th : thetas) worst = std::max(worst, pi * std::abs(expm1_i(th * row.r[j])));
  }
  return {worst, 2.0 * max_lambda / row.mu};
}

AssumptionReport check_assumptions(const OnOffArraySpec& spec, const LevyMeasure& nu,
                                   const AssumptionOptions& opt) {
  if (opt.n_list.empty()) throw PreconditionError("assumption check needs at least one n");
  const std::vector<double> thetas = opt.theta_grid.empty() ? default_thetas() : opt.theta_grid;
  const double mu = spec.mu();
  std::vector<EmpiricalLevyMeasure> measures;
  std::vector<OnOffRow> rows;
  for (std::size_t n : opt.n_list) {
    rows.push_back(spec.row(n));
    measures.emplace_back(rows.back());
  }
  const EmpiricalLevyMeasure& last = measures.back();
  AssumptionReport report;

  {  // Largest rate decreases along n_list.
    std::vector<double> seq;
    for (const auto& m : measures) seq.push_back(m.max_lambda());
    bool pass = true;
    for (std::size_t k = 1; k < seq.size(); ++k) pass = pass && seq[k] < seq[k - 1];
    report.checks.push_back({"largest rate decreasing", pass, {{"n", opt.n_list}, {"max_lambda", seq}}});
  }
  {  // Small-jump first moments shrink with eps.
    nlohmann::json obs = nlohmann::json::array();
    std::vector<double> at_last;
    std::vector<double> eps_sorted = opt.eps_list;
    std::sort(eps_sorted.rbegin(), eps_sorted.rend());
    for (double eps : eps_sorted) {
      std::vector<double> seq;
      for (const auto& m : measures) seq.push_back(m.small_jump_sum(eps));
      at_last.push_back(seq.back());
      obs.push_back({{"eps", eps}, {"sums", seq}, {"limit", nu.small_jump_mean(eps)}});
    }
    bool pass = true;
    for (std::size_t k = 1; k < at_last.size(); ++k) pass = pass && at_last[k] <= at_last[k - 1];
    report.checks.push_back({"small-jump first moments vanish", pass, obs});
  }
  {  // Bounded power sums, compared with the limit moments.
    nlohmann::json obs = nlohmann::json::array();
    bool pass = true;
    for (double p : opt.powers) {
      std::vector<double> seq;
      for (const auto& m : measures) seq.push_back(m.power_sum(p));
      const double limit = nu.moment(static_cast<int>(p));
      const double sup = *std::max_element(seq.begin(), seq.end());
      const double err = relative_error(seq.back(), limit);
      pass = pass && std::isfinite(sup) && err <= opt.relative_tolerance;
      obs.push_back({{"p", p}, {"sums", seq}, {"sup", sup}, {"limit", limit}, {"relative_error", err}});
    }
    report.checks.push_back({"power sums bounded", pass, obs});
  }
  {  // Tails and first-moment tails.
    nlohmann::json tails = nlohmann::json::array();
    nlohmann::json firsts = nlohmann::json::array();
    bool pass4 = true;
    bool pass6 = true;
    for (double x : opt.x_probe) {
      std::vector<double> t_seq, f_seq;
      for (const auto& m : measures) {
        t_seq.push_back(m.tail(x));
        f_seq.push_back(m.first_moment_tail(x));
      }
      const double t_lim = nu.tail(x);
      const double f_lim = nu.first_moment_tail(x);
      const double t_err = relative_error(t_seq.back(), t_lim);
      const double f_err = relative_error(f_seq.back(), f_lim);
      pass4 = pass4 && t_err <= opt.relative_tolerance;
      pass6 = pass6 && f_err <= opt.relative_tolerance;
      tails.push_back({{"x", x}, {"values", t_seq}, {"limit", t_lim}, {"relative_error", t_err}});
      firsts.push_back({{"x", x}, {"values", f_seq}, {"limit", f_lim}, {"relative_error", f_err}});
    }
    report.checks.push_back({"tails converge", pass4, tails});
    report.checks.push_back({"first-moment tails converge", pass6, firsts});
  }
  {  // Finite first and second moments of the limit.
    const double m1 = nu.moment(1);
    const double m2 = nu.moment(2);
    report.checks.push_back({"limit moments finite", std::isfinite(m1) && std::isfinite(m2),
                             {{"m1", m1}, {"m2", m2}}});
  }
  {  // CF sums converge uniformly on the theta grid.
    double sup = 0.0;
    double at = 0.0;
    for (double th : thetas) {
      const double d = std::abs(last.cf_sum(th) - nu.integrate_cf(th));
      if (d > sup) {
        sup = d;
        at = th;
      }
    }
    report.checks.push_back({"CF sums converge", sup <= opt.cf_tolerance,
                             {{"n", opt.n_list.back()}, {"sup", sup}, {"theta_at_sup", at},
                              {"tolerance", opt.cf_tolerance}}});
  }
  {  // sum P(zeta >= x) -> nu[x, inf) / mu.
    nlohmann::json obs = nlohmann::json::array();
    bool pass = true;
    for (double x : opt.x_probe) {
      const double v = last.c1_sum(x, mu);
      const double lim = nu.tail(x) / mu;
      const double err = relative_error(v, lim);
      pass = pass && err <= opt.relative_tolerance;
      obs.push_back({{"x", x}, {"value", v}, {"limit", lim}, {"relative_error", err}});
    }
    report.checks.push_back({"tail sums of source levels", pass, obs});
  }
  {  // With gamma = 0: sum E[zeta 1(zeta <= eps)] -> int_0^eps x nu(dx) / mu.
    nlohmann::json obs = nlohmann::json::array();
    bool pass = true;
    std::vector<double> eps_sorted = opt.eps_list;
    std::sort(eps_sorted.rbegin(), eps_sorted.rend());
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : eps_sorted) {
      const double v = last.c2_sum(eps, mu);
      const double lim = nu.small_jump_mean(eps) / mu;
      const double err = relative_error(v, lim);
      pass = pass && err <= opt.c2_tolerance && v < prev;
      prev = v;
      obs.push_back({{"eps", eps}, {"value", v}, {"limit", lim}, {"relative_error", err}});
    }
    report.checks.push_back({"small-jump sums of source levels", pass, obs});
  }
  {  // u.a.n.
    nlohmann::json obs = nlohmann::json::array();
    bool pass = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto [worst, bound] = uan_check(rows[k], thetas);
      pass = pass && worst <= bound;
      obs.push_back({{"n", opt.n_list[k]}, {"max_deviation", worst}, {"bound", bound}});
    }
    report.checks.push_back({"negligibility bound", pass, obs});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Convergence study

nlohmann::json ConvergenceReport::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& row : rows)
    r.push_back({{"n", row.n}, {"sup", row.sup}, {"l2", row.l2}, {"bias_sup", row.bias_sup},
                 {"noise_sup", row.noise_sup}, {"max_stderr", row.max_stderr}});
  return {{"rows", r},
          {"replications", replications},
          {"mc_bound", mc_bound},
          {"tolerance", tolerance},
          {"monotone_slack", monotone_slack},
          {"monotone", monotone},
          {"final_within_tolerance", final_within_tolerance}};
}

ConvergenceReport convergence_study(const OnOffArraySpec& spec, const LevyMeasure& nu,
                                    const TimeGrid& grid, const ThetaGrid& thetas,
                                    std::span<const std::size_t> n_list,
                                    const ConvergenceOptions& opt) {
  if (n_list.empty()) throw PreconditionError("convergence study needs at least one n");
  if (thetas.dimension() != grid.size())
    throw PreconditionError("theta grid dimension must match the time grid");
  const double mu = spec.mu();
  const LevyExponent law = limit_exponent(nu, mu);
  const std::vector<Complex> limit = analytic_cf(
      thetas, [&](std::span<const double> th) { return espc_log_cf(law, mu, grid, th); });

  ConvergenceReport report;
  report.replications = opt.replications;
  report.mc_bound = 4.0 / std::sqrt(static_cast<double>(opt.replications));
  report.tolerance = opt.tolerance;
  report.monotone_slack = opt.monotone_slack;
  for (std::size_t n : n_list) {
    const OnOffRow row = spec.row(n);
    const SuperpositionSampler sampler(row, grid);
    Rng seeder = Rng::stream(opt.seed, n);
    const SampleMatrix samples =
        generate_samples(opt.replications, grid.size(), seeder(), opt.threads,
                         [&](Rng& rng, std::span<double> out) { sampler.sample(rng, out); });
    const EmpiricalCF emp = empirical_cf(samples, thetas, opt.threads);
    std::vector<Complex> exact(thetas.size());
    for (std::size_t p = 0; p < thetas.size(); ++p)
      exact[p] = superposition_cf(row, grid, thetas.point(p));
    ConvergenceRow out{n, 0.0, 0.0, 0.0, 0.0, 0.0};
    const CfDistance d = cf_distance(emp, limit);
    out.sup = d.sup;
    out.l2 = d.l2;
    out.noise_sup = cf_distance(emp, exact).sup;
    for (std::size_t p = 0; p < thetas.size(); ++p)
      out.bias_sup = std::max(out.bias_sup, std::abs(exact[p] - limit[p]));
    out.max_stderr = *std::max_element(emp.stderrs.begin(), emp.stderrs.end());
    report.rows.push_back(out);
  }
  report.monotone = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k)
    report.monotone = report.monotone &&
                      report.rows[k].sup <= report.rows[k - 1].sup + opt.monotone_slack;
  report.final_within_tolerance = report.rows.back().sup <= opt.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// ON/OFF moment bounds

IncrementMoments increment_moments(const OnOffSource& src, double u, double t, double s) {
  src.validate();
  if (!(u < t && t < s)) throw PreconditionError("increment moments need u < t < s");
  const double a = src.alpha();
  const double lm = src.lambda * src.mu;
  const double r2 = src.r * src.r;
  const double f1 = -std::expm1(-a * (t - u));
  const double f2 = -std::expm1(-a * (s - t));
  IncrementMoments m;
  m.fourth = lm * r2 * r2 / (a * a) * f1 * f2;
  m.cross = -lm * r2 / (a * a) * f1 * f2;
  m.second = 2.0 * lm * r2 / (a * a) * f1;
  m.fourth_bound = r2 * r2 * lm * (s - u) * (s - u) / 4.0;
  m.cross_bound = r2 * lm * (s - u) * (s - u) / 4.0;
  m.second_bound = 2.0 * lm * r2 * (t - u) / a;
  return m;
}

bool BoundsCheckReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.violations.empty(); });
}

nlohmann::json BoundsCheckReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  auto mc = [](const MeanEstimate& m) { return nlohmann::json{{"value", m.value}, {"stderr", m.std_error}}; };
  for (const auto& e : entries) {
    arr.push_back({{"u", e.u}, {"t", e.t}, {"s", e.s},
                   {"fourth", e.exact.fourth}, {"fourth_bound", e.exact.fourth_bound},
                   {"cross", e.exact.cross}, {"cross_bound", e.exact.cross_bound},
                   {"second", e.exact.second}, {"second_bound", e.exact.second_bound},
                   {"mc_fourth", mc(e.mc_fourth)}, {"mc_cross", mc(e.mc_cross)},
                   {"mc_second", mc(e.mc_second)}, {"violations", e.violations}});
  }
  return {{"entries", arr}, {"pass", pass()}};
}

BoundsCheckReport appendix_bounds_check(const OnOffSource& src,
                                        std::span<const std::array<double, 3>> triples,
                                        std::size_t replications, std::uint64_t seed,
                                        unsigned threads) {
  constexpr double kSigma = 4.0;
  constexpr double kRoundoff = 1e-12;
  BoundsCheckReport report;
  for (std::size_t q = 0; q < triples.size(); ++q) {
    const auto [u, t, s] = triples[q];
    BoundsCheckEntry e{u, t, s, increment_moments(src, u, t, s), {}, {}, {}, {}};
    const auto& m = e.exact;
    if (m.fourth > m.fourth_bound * (1.0 + kRoundoff)) e.violations.push_back("fourth-moment bound");
    if (std::abs(m.cross) > m.cross_bound * (1.0 + kRoundoff)) e.violations.push_back("cross-moment bound");
    if (m.second > m.second_bound * (1.0 + kRoundoff)) e.violations.push_back("second-moment bound");
    if (replications >= 2) {
      const TimeGrid grid({u, t, s});
      Rng seeder = Rng::stream(seed, q);
      const SampleMatrix paths = generate_samples(
          replications, 3, seeder(), threads, [&](Rng& rng, std::span<double> out) {
            const auto path = simulate_source_path(src, grid, rng);
            std::copy(path.begin(), path.end(), out.begin());
          });
      e.mc_fourth = empirical_mean(paths, [](auto z) {
        const double a = z[1] - z[0], b = z[2] - z[1];
        return a * a * b * b;
      }, threads);
      e.mc_cross = empirical_mean(paths, [](auto z) { return (z[0] - z[1]) * (z[1] - z[2]); }, threads);
      e.mc_second = empirical_mean(paths, [](auto z) { return (z[1] - z[0]) * (z[1] - z[0]); }, threads);
      auto check = [&](const MeanEstimate& est, double exact, double bound, bool absolute,
                       const char* name) {
        const double v = absolute ? std::abs(est.value) : est.value;
        if (v > bound + kSigma * est.std_error) e.violations.push_back(std::string("mc ") + name);
        if (std::abs(est.value - exact) > kSigma * est.std_error + kRoundoff)
          e.violations.push_back(std::string("mc disagrees with closed form ") + name);
      };
      check(e.mc_fourth, m.fourth, m.fourth_bound, false, "fourth-moment bound");
      check(e.mc_cross, m.cross, m.cross_bound, true, "cross-moment bound");
      check(e.mc_second, m.second, m.second_bound, false, "second-moment bound");
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::pair<Complex, Complex> algebraic_identity_check(std::span<const double> theta,
                                                     const TimeGrid& grid, double alpha, double r) {
  const std::size_t m = grid.size();
  if (m < 2 || theta.size() != m) throw PreconditionError("identity check needs m >= 2 epochs and thetas");
  std::vector<Complex> x(m);
  for (std::size_t k = 0; k < m; ++k) x[k] = expm1_i(r * theta[k]);
  Complex lhs = 0.0;
  for_each_subset(m, [&](std::span<const std::size_t> idx) {
    Complex term = std::exp(-alpha * (grid[idx.back()] - grid[idx.front()]));
    for (std::size_t k : idx) term *= x[k];
    lhs += term;
  });
  const WeightMatrix w = espc_product_weights(alpha, grid);
  Complex rhs = 0.0;
  for (std::size_t u = 0; u < m; ++u) {
    double sum = 0.0;
    for (std::size_t v = u; v < m; ++v) {
      sum += theta[v];
      rhs += expm1_i(r * sum) * w(u, v);
    }
    rhs -= x[u];
  }
  return {lhs, rhs};
}

double joint_on_probability(const OnOffSource& src, const TimeGrid& grid,
                            std::span<const std::size_t> indices) {
  if (indices.empty()) return 1.0;
  const double pi = src.pi();
  double p = pi;
  for (std::size_t k = 1; k < indices.size(); ++k) {
    const double e = std::exp(-src.alpha() * (grid[indices[k]] - grid[indices[k - 1]]));
    p *= e + pi * (1.0 - e);
  }
  return p;
}

double remainder_L(const OnOffSource& src, const TimeGrid& grid, std::span<const std::size_t> indices) {
  if (indices.empty()) throw PreconditionError("remainder needs at least one index");
  const double span = grid[indices.back()] - grid[indices.front()];
  return joint_on_probability(src, grid, indices) - src.lambda / src.mu * std::exp(-src.mu * span);
}

Complex remainder_R(const OnOffSource& src, const TimeGrid& grid, std::span<const double> theta) {
  const std::size_t m = grid.size();
  if (theta.size() != m) throw PreconditionError("theta length must match the grid size");
  std::vector<Complex> x(m);
  for (std::size_t k = 0; k < m; ++k) x[k] = expm1_i(src.r * theta[k]);
  Complex total = 0.0;
  for_each_subset(m, [&](std::span<const std::size_t> idx) {
    Complex term = remainder_L(src, grid, idx);
    for (std::size_t k : idx) term *= x[k];
    total += term;
  });
  Complex singles = 0.0;
  for (const auto& v : x) singles += v;
  return total + (src.pi() - src.lambda / src.mu) * singles;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope fit needs matching points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(std::abs(y[k]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

nlohmann::json RemainderReport::to_json() const {
  return {{"min_L", min_L},
          {"sign_violations", sign_violations},
          {"fitted_M", fitted_M},
          {"slope_L_lambda", slope_L_lambda},
          {"fitted_K", fitted_K},
          {"slope_R_lambda", slope_R_lambda},
          {"slope_R_r", slope_R_r},
          {"scaling_pass", scaling_pass},
          {"sign_pass", sign_pass}};
}

RemainderReport remainder_bound_check(const TimeGrid& grid, std::span<const double> theta,
                                      const RemainderOptions& opt) {
  constexpr double kSlopeTolerance = 0.1;
  RemainderReport rep{0.0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, false, false};
  std::vector<double> max_l;
  for (double lambda : opt.lambda_sweep) {
    const OnOffSource src{lambda, opt.mu, opt.r_fixed};
    double worst = 0.0;
    for_each_subset(grid.size(), [&](std::span<const std::size_t> idx) {
      const double l = remainder_L(src, grid, idx);
      rep.min_L = std::min(rep.min_L, l);
      if (l < 0.0) ++rep.sign_violations;
      worst = std::max(worst, std::abs(l));
    });
    max_l.push_back(worst);
    rep.fitted_M = std::max(rep.fitted_M, worst / (lambda * lambda));
  }
  rep.slope_L_lambda = loglog_slope(opt.lambda_sweep, max_l);

  std::vector<double> r_by_lambda;
  for (double lambda : opt.lambda_sweep) {
    const double v = std::abs(remainder_R({lambda, opt.mu, opt.r_fixed}, grid, theta));
    r_by_lambda.push_back(v);
    rep.fitted_K = std::max(rep.fitted_K, v / (lambda * lambda * opt.r_fixed));
  }
  rep.slope_R_lambda = loglog_slope(opt.lambda_sweep, r_by_lambda);
  std::vector<double> r_by_r;
  for (double r : opt.r_sweep) {
    const double v = std::abs(remainder_R({opt.lambda_fixed, opt.mu, r}, grid, theta));
    r_by_r.push_back(v);
    rep.fitted_K = std::max(rep.fitted_K, v / (opt.lambda_fixed * opt.lambda_fixed * r));
  }
  rep.slope_R_r = loglog_slope(opt.r_sweep, r_by_r);
  rep.scaling_pass = std::abs(rep.slope_L_lambda - 2.0) <= kSlopeTolerance &&
                     std::abs(rep.slope_R_lambda - 2.0) <= kSlopeTolerance &&
                     std::abs(rep.slope_R_r - 1.0) <= kSlopeTolerance;
  rep.sign_pass = rep.sign_violations == 0;
  return rep;
}

std::pair<double, double> superposition_fourth_moment(const OnOffRow& row, double t1, double t2,
                                                      double t3) {
  if (!(t1 < t2 && t2 < t3)) throw PreconditionError("epochs must satisfy t1 < t2 < t3");
  double q4 = 0.0, sa = 0.0, sb = 0.0, sab = 0.0, sc = 0.0, scc = 0.0;
  double sum_lr4 = 0.0, sum_lr2 = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const OnOffSource src{row.lambda[j], row.mu, row.r[j]};
    const IncrementMoments m = increment_moments(src, t1, t2, t3);
    const double a2 = m.second;
    const double b2 = increment_moments(src, t2, t3, t3 + 1.0).second;
    q4 += m.fourth;
    sa += a2;
    sb += b2;
    sab += a2 * b2;
    sc += m.cross;
    scc += m.cross * m.cross;
    const double r2 = row.r[j] * row.r[j];
    sum_lr4 += row.lambda[j] * r2 * r2;
    sum_lr2 += row.lambda[j] * r2;
  }
  const double exact = q4 + (sa * sb - sab) + 2.0 * (sc * sc - scc);
  const double h = t3 - t1;
  const double mu = row.mu;
  const double bound =
      mu * h * h / 4.0 * sum_lr4 + h * h * sum_lr2 * sum_lr2 + mu * mu * h * h * h * h / 8.0 * sum_lr2 * sum_lr2;
  return {exact, bound};
}

}  // namespace gcid
