#include "srde/convolution_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "srde/errors.hpp"
#include "srde/parallel.hpp"

namespace srde {

// ---------------------------------------------------------------------------
// SigmaPath

SigmaPath SigmaPath::constant(double value, std::size_t steps) {
  return scalar_series(std::vector<double>(steps, value));
}

SigmaPath SigmaPath::scalar_series(std::vector<double> values) {
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("sigma path must be finite");
  SigmaPath path;
  path.steps_ = values.size();
  path.scalars_ = std::move(values);
  return path;
}

SigmaPath SigmaPath::fields(std::vector<std::vector<double>> fields) {
  if (fields.empty()) throw std::invalid_argument("field sigma path needs at least one step");
  const std::size_t width = fields.front().size();
  for (const auto& row : fields) {
    if (row.size() != width) throw std::invalid_argument("sigma fields must share one grid");
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); }))
      throw std::invalid_argument("sigma path must be finite");
  }
  SigmaPath path;
  path.steps_ = fields.size();
  path.fields_ = std::move(fields);
  return path;
}

double SigmaPath::scalar(std::size_t m) const {
  if (is_field()) throw std::logic_error("sigma path is a field path");
  return scalars_.at(m);
}

std::span<const double> SigmaPath::field(std::size_t m) const {
  if (!is_field()) throw std::logic_error("sigma path is a scalar path");
  return fields_.at(m);
}

bool SigmaPath::is_zero() const noexcept {
  if (!is_field()) return std::all_of(scalars_.begin(), scalars_.end(), [](double v) { return v == 0.0; });
  return std::all_of(fields_.begin(), fields_.end(), [](const auto& row) {
    return std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
  });
}

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(ZAlphaRule rule) {
  return rule == ZAlphaRule::left_endpoint ? "left_endpoint" : "cell_average";
}

ZAlphaRule parse_z_alpha_rule(const std::string& text) {
  if (text == "left_endpoint") return ZAlphaRule::left_endpoint;
  if (text == "cell_average") return ZAlphaRule::cell_average;
  throw std::invalid_argument("unknown quadrature rule '" + text + "'");
}

namespace {

void check_alpha(double alpha, double eta) {
  if (!(alpha > 0.0 && alpha < (1.0 - eta) / 2.0))
    throw std::invalid_argument("alpha must lie in (0, (1 - eta)/2) = (0, " + std::to_string((1.0 - eta) / 2.0) +
                                ")");
}

std::size_t steps_for(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= dt)) throw std::invalid_argument("horizon must be at least dt");
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

}  // namespace

void ConvolutionConfig::validate(double eta) const {
  check_alpha(alpha, eta);
  if (!(zeta > 0.0 && zeta < 2.0 * alpha)) throw std::invalid_argument("zeta must lie in (0, 2 alpha)");
  if (!(p >= 2.0)) throw std::invalid_argument("p must be at least 2");
  const double floor = std::max(1.0 / zeta, 1.0 / (alpha - zeta / 2.0));
  if (!(p > floor)) throw std::invalid_argument("p must exceed max{1/zeta, 1/(alpha - zeta/2)} = " +
                                                std::to_string(floor));
  steps_for(horizon, dt);
  if (noise_modes == 0) throw std::invalid_argument("noise_modes must be positive");
}

std::size_t ConvolutionConfig::num_steps() const { return steps_for(horizon, dt); }

// ---------------------------------------------------------------------------
// Increments and convolutions

void increment_coefficients(const SigmaPath& sigma, const SpectralBasis& basis,
                            const NoiseSpectrum& spectrum, std::size_t noise_modes, double dt,
                            const CounterNormal& stream, std::size_t m, std::span<double> out) {
  const std::size_t modes = basis.num_modes();
  if (out.size() != modes) throw std::invalid_argument("output does not match the basis");
  if (noise_modes > modes) throw std::invalid_argument("noise_modes exceeds num_modes");
  std::fill(out.begin(), out.end(), 0.0);
  const double sqrt_dt = std::sqrt(dt);
  if (!sigma.is_field()) {
    const double s = sigma.scalar(m);
    if (s == 0.0) return;
    for (std::size_t j = 0; j < noise_modes; ++j) {
      const double lambda = spectrum.lambda(j + 1);
      if (lambda != 0.0) out[j] = s * lambda * sqrt_dt * stream(m, j);
    }
    return;
  }
  const auto field = sigma.field(m);
  if (field.size() != basis.grid_size()) throw std::invalid_argument("sigma field does not match the grid");
  std::vector<double> grid(basis.grid_size(), 0.0);
  for (std::size_t j = 0; j < noise_modes; ++j) {
    const double lambda = spectrum.lambda(j + 1);
    if (lambda == 0.0) continue;
    const double c = lambda * sqrt_dt * stream(m, j);
    const auto row = basis.mode_row(j);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] += c * row[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] *= field[i];
  forward_transform_into(basis, grid, out);
}

CoefficientPath stochastic_convolution_direct(const SigmaPath& sigma, const SpectralBasis& basis,
                                              const NoiseSpectrum& spectrum, std::size_t noise_modes,
                                              double dt, const CounterNormal& stream) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t modes = basis.num_modes();
  const std::size_t steps = sigma.steps();
  CoefficientPath path;
  path.dt = dt;
  path.coeffs.assign(steps + 1, std::vector<double>(modes, 0.0));
  std::vector<double> decay(modes);
  for (std::size_t k = 0; k < modes; ++k) decay[k] = std::exp(-basis.eigenvalues()[k] * dt);
  std::vector<double> g(modes);
  for (std::size_t m = 0; m < steps; ++m) {
    increment_coefficients(sigma, basis, spectrum, noise_modes, dt, stream, m, g);
    for (std::size_t k = 0; k < modes; ++k) path.coeffs[m + 1][k] = decay[k] * path.coeffs[m][k] + g[k];
  }
  return path;
}

double z_alpha_weight(double alpha, double dt, std::size_t lag, ZAlphaRule rule) {
  const double l = static_cast<double>(lag);
  if (rule == ZAlphaRule::left_endpoint) return std::pow((l + 1.0) * dt, -alpha);
  const double hi = std::pow(l + 1.0, 1.0 - alpha);
  const double lo = lag == 0 ? 0.0 : std::pow(l, 1.0 - alpha);
  return (hi - lo) * std::pow(dt, -alpha) / (1.0 - alpha);
}

namespace {

// kernel[lag][k] = weight(lag) * exp(-alpha_k lag dt)
std::vector<std::vector<double>> z_alpha_kernel(const SpectralBasis& basis, double alpha, double dt,
                                                std::size_t steps, ZAlphaRule rule) {
  const std::size_t modes = basis.num_modes();
  std::vector<std::vector<double>> kernel(steps, std::vector<double>(modes));
  for (std::size_t lag = 0; lag < steps; ++lag) {
    const double w = z_alpha_weight(alpha, dt, lag, rule);
    for (std::size_t k = 0; k < modes; ++k)
      kernel[lag][k] = w * std::exp(-basis.eigenvalues()[k] * static_cast<double>(lag) * dt);
  }
  return kernel;
}

// Z_alpha(t_n) from stored increments g[m][k].
void z_alpha_at(const std::vector<std::vector<double>>& kernel, const std::vector<std::vector<double>>& g,
                std::size_t n, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const auto& row = kernel[n - m - 1];
    const auto& gm = g[m];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += row[k] * gm[k];
  }
}

}  // namespace

CoefficientPath z_alpha_path(const SigmaPath& sigma, const SpectralBasis& basis,
                             const NoiseSpectrum& spectrum, std::size_t noise_modes, double alpha,
                             double dt, const CounterNormal& stream, std::span<const std::uint8_t> cutoff,
                             ZAlphaRule rule) {
  check_alpha(alpha, compute_eta(spectrum));
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t steps = sigma.steps();
  if (!cutoff.empty() && cutoff.size() != steps)
    throw std::invalid_argument("cutoff indicator needs one entry per step");
  const std::size_t modes = basis.num_modes();

  std::vector<std::vector<double>> g(steps, std::vector<double>(modes, 0.0));
  for (std::size_t m = 0; m < steps; ++m) {
    if (!cutoff.empty() && cutoff[m] == 0) continue;
    increment_coefficients(sigma, basis, spectrum, noise_modes, dt, stream, m, g[m]);
  }
  const auto kernel = z_alpha_kernel(basis, alpha, dt, steps, rule);
  CoefficientPath path;
  path.dt = dt;
  path.coeffs.assign(steps + 1, std::vector<double>(modes, 0.0));
  for (std::size_t n = 1; n <= steps; ++n) z_alpha_at(kernel, g, n, path.coeffs[n]);
  return path;
}

namespace {

// int_{r0}^{r1} r^(s-1) e^(-a r) dr, choosing the incomplete-gamma branch that avoids cancellation.
double gamma_moment(double s, double a, double r0, double r1) {
  const double x0 = a * r0;
  const double x1 = a * r1;
  const double scale = std::pow(a, -s);
  if (x0 > 1.0) return scale * (boost::math::tgamma(s, x0) - boost::math::tgamma(s, x1));
  const double lo = r0 == 0.0 ? 0.0 : boost::math::tgamma_lower(s, x0);
  return scale * (boost::math::tgamma_lower(s, x1) - lo);
}

}  // namespace

CoefficientPath factorization_reconstruct(const CoefficientPath& z_alpha, const SpectralBasis& basis,
                                          double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
  const std::size_t steps = z_alpha.steps();
  const std::size_t modes = basis.num_modes();
  const double dt = z_alpha.dt;
  for (const auto& row : z_alpha.coeffs)
    if (row.size() != modes) throw std::invalid_argument("Z_alpha path does not match the basis");

  // Per lag and mode: weights of the left and right cell values.
  std::vector<std::vector<double>> w0(steps, std::vector<double>(modes));
  std::vector<std::vector<double>> w1(steps, std::vector<double>(modes));
  for (std::size_t lag = 0; lag < steps; ++lag) {
    const double r0 = static_cast<double>(lag) * dt;
    const double r1 = static_cast<double>(lag + 1) * dt;
    for (std::size_t k = 0; k < modes; ++k) {
      const double a = basis.eigenvalues()[k];
      const double m0 = gamma_moment(alpha, a, r0, r1);
      const double m1 = gamma_moment(alpha + 1.0, a, r0, r1);
      w1[lag][k] = (r1 * m0 - m1) / dt;
      w0[lag][k] = m0 - w1[lag][k];
    }
  }

  const double c = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  CoefficientPath path;
  path.dt = dt;
  path.coeffs.assign(steps + 1, std::vector<double>(modes, 0.0));
  for (std::size_t n = 1; n <= steps; ++n) {
    auto& out = path.coeffs[n];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lag = n - 1 - i;
      const auto& left = z_alpha.coeffs[i];
      const auto& right = z_alpha.coeffs[i + 1];
      for (std::size_t k = 0; k < modes; ++k) out[k] += w0[lag][k] * left[k] + w1[lag][k] * right[k];
    }
    for (double& v : out) v *= c;
  }
  return path;
}

double beta_constant(double alpha, double eta) {
  const double s = 2.0 * alpha + eta;
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("2 alpha + eta must lie in (0, 1)");
  return std::numbers::pi / std::sin(std::numbers::pi * s);
}

double relative_sup_error(const CoefficientPath& a, const CoefficientPath& b, const SpectralBasis& basis) {
  if (a.coeffs.size() != b.coeffs.size()) throw std::invalid_argument("paths have different lengths");
  double diff = 0.0;
  double scale = 0.0;
  std::vector<double> ga(basis.grid_size());
  std::vector<double> gb(basis.grid_size());
  for (std::size_t n = 0; n < a.coeffs.size(); ++n) {
    inverse_transform_into(basis, a.coeffs[n], ga);
    inverse_transform_into(basis, b.coeffs[n], gb);
    for (std::size_t m = 0; m < ga.size(); ++m) {
      diff = std::max(diff, std::fabs(ga[m] - gb[m]));
      scale = std::max(scale, std::fabs(gb[m]));
    }
  }
  if (scale == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
  return diff / scale;
}

// ---------------------------------------------------------------------------
// Moment experiments

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// E|N(0,1)|^p
double gaussian_abs_moment(double p) {
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

void mean_and_error(const std::vector<double>& values, double& mean, double& se) {
  const double n = static_cast<double>(values.size());
  mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

MomentBoundReport moment_bound_check(const ConvolutionConfig& config, const ModelSpec& model,
                                     const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                                     std::span<const double> sup_path, std::size_t trials,
                                     std::uint64_t seed, unsigned workers, std::size_t points) {
  // Only the alpha window and p >= 2 matter for the L^p bound; zeta enters the sup bound alone.
  const double eta = compute_eta(spectrum);
  check_alpha(config.alpha, eta);
  if (!(config.p >= 2.0)) throw std::invalid_argument("p must be at least 2");
  if (trials < 100) throw std::invalid_argument("moment_bound_check needs at least 100 trials");
  const std::size_t steps = config.num_steps();
  if (sup_path.size() < steps) throw std::invalid_argument("sup-norm path shorter than the horizon");
  if (points == 0 || points > steps) throw std::invalid_argument("points must lie in [1, steps]");
  const std::size_t noise_modes = std::min(config.noise_modes, basis.num_modes());
  const std::size_t modes = basis.num_modes();
  const double dt = config.dt;

  std::vector<double> s(steps);
  for (std::size_t m = 0; m < steps; ++m) s[m] = model.k2 == 0.0 ? 0.0 : sigma_eval(model, sup_path[m]);
  const SigmaPath sigma = SigmaPath::scalar_series(s);

  std::vector<std::size_t> at(points);
  for (std::size_t i = 0; i < points; ++i)
    at[i] = static_cast<std::size_t>(std::llround(static_cast<double>((i + 1) * steps) / static_cast<double>(points)));

  const auto kernel = z_alpha_kernel(basis, config.alpha, dt, steps, config.rule);
  const double h = basis.grid_spacing();

  MomentBoundReport report;
  report.trials = trials;
  for (std::size_t n : at) report.times.push_back(static_cast<double>(n) * dt);

  std::vector<std::vector<double>> samples(points, std::vector<double>(trials, 0.0));
  if (!sigma.is_zero()) {
    parallel_for(trials, workers, [&](std::size_t trial) {
      const CounterNormal stream(derive_seed(seed, trial));
      std::vector<std::vector<double>> g(steps, std::vector<double>(modes, 0.0));
      for (std::size_t m = 0; m < steps; ++m)
        increment_coefficients(sigma, basis, spectrum, noise_modes, dt, stream, m, g[m]);
      std::vector<double> z(modes);
      std::vector<double> grid(basis.grid_size());
      for (std::size_t i = 0; i < points; ++i) {
        z_alpha_at(kernel, g, at[i], z);
        inverse_transform_into(basis, z, grid);
        double norm = 0.0;
        for (double v : grid) norm += std::pow(std::fabs(v), config.p);
        samples[i][trial] = h * norm;
      }
    });
  }

  const double q = eta + 2.0 * config.alpha;
  const double gauss = gaussian_abs_moment(config.p);
  std::vector<double> log_t, log_ratio;
  for (std::size_t i = 0; i < points; ++i) {
    const std::size_t n = at[i];
    double mean = 0.0, se = 0.0;
    mean_and_error(samples[i], mean, se);
    report.lhs.push_back(mean);
    report.lhs_standard_error.push_back(se);

    // Per-mode variance of Z_alpha(t_n) for the deterministic sigma path.
    std::vector<double> var(modes, 0.0);
    for (std::size_t k = 0; k < noise_modes; ++k) {
      const double lambda = spectrum.lambda(k + 1);
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const double kv = kernel[n - m - 1][k] * s[m];
        acc += kv * kv;
      }
      var[k] = acc * lambda * lambda * dt;
    }
    double exact = 0.0;
    for (std::size_t x = 0; x < basis.grid_size(); ++x) {
      double v = 0.0;
      for (std::size_t k = 0; k < modes; ++k) {
        const double e = basis.mode_row(k)[x];
        v += var[k] * e * e;
      }
      exact += std::pow(v, config.p / 2.0);
    }
    report.lhs_exact.push_back(h * gauss * exact);

    double integral = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double lag = static_cast<double>(n - m - 1);
      const double cell = (std::pow((lag + 1.0) * dt, 1.0 - q) - std::pow(lag * dt, 1.0 - q)) / (1.0 - q);
      integral += s[m] * s[m] * cell;
    }
    const double rhs = std::pow(integral, config.p / 2.0);
    report.rhs.push_back(rhs);
    const double ratio = rhs > 0.0 ? mean / rhs : 0.0;
    report.ratio.push_back(ratio);
    if (ratio > 0.0) {
      log_t.push_back(std::log(report.times[i]));
      log_ratio.push_back(std::log(ratio));
    }
  }
  report.log_slope = least_squares_slope(log_t, log_ratio);
  return report;
}

ScalingFit sup_moment_scaling(const ConvolutionConfig& config, double sigma_scale,
                              const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                              std::span<const double> horizons, std::size_t trials, std::uint64_t seed,
                              unsigned workers) {
  config.validate(compute_eta(spectrum));
  if (trials < 2) throw std::invalid_argument("sup_moment_scaling needs at least two trials");
  if (horizons.size() < 4) throw std::invalid_argument("need at least four horizons");
  const double dt = config.dt;
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw std::invalid_argument("horizons must be positive");
    if (i > 0) {
      if (!(horizons[i] > horizons[i - 1])) throw std::invalid_argument("horizons must increase");
      const double q0 = horizons[1] / horizons[0];
      const double qi = horizons[i] / horizons[i - 1];
      if (std::fabs(qi - q0) > 1e-9 * q0) throw std::invalid_argument("horizons must form a geometric ladder");
    }
    const double n = std::round(horizons[i] / dt);
    if (n < 1.0 || std::fabs(n * dt - horizons[i]) > 1e-9 * horizons[i])
      throw std::invalid_argument("horizons must lie on the dt grid");
    at.push_back(static_cast<std::size_t>(n));
  }

  const std::size_t modes = basis.num_modes();
  const std::size_t noise_modes = std::min(config.noise_modes, modes);
  const std::size_t steps = at.back();
  std::vector<std::vector<double>> samples(at.size(), std::vector<double>(trials, 0.0));
  if (sigma_scale != 0.0) {
    std::vector<double> decay(modes), scale(noise_modes);
    for (std::size_t k = 0; k < modes; ++k) decay[k] = std::exp(-basis.eigenvalues()[k] * dt);
    for (std::size_t j = 0; j < noise_modes; ++j) scale[j] = sigma_scale * spectrum.lambda(j + 1) * std::sqrt(dt);
    parallel_for(trials, workers, [&](std::size_t trial) {
      const CounterNormal stream(derive_seed(seed, trial));
      std::vector<double> z(modes, 0.0);
      std::vector<double> grid(basis.grid_size());
      double running = 0.0;
      std::size_t next = 0;
      for (std::size_t m = 0; m < steps; ++m) {
        for (std::size_t k = 0; k < modes; ++k) z[k] *= decay[k];
        for (std::size_t j = 0; j < noise_modes; ++j)
          if (scale[j] != 0.0) z[j] += scale[j] * stream(m, j);
        inverse_transform_into(basis, z, grid);
        for (double v : grid) running = std::max(running, std::fabs(v));
        while (next < at.size() && at[next] == m + 1) samples[next++][trial] = std::pow(running, config.p);
      }
    });
  }

  ScalingFit fit;
  fit.trials = trials;
  fit.bound_slope = config.p * (config.alpha - config.zeta / 2.0);
  fit.horizons.assign(horizons.begin(), horizons.end());
  for (const auto& column : samples) {
    double mean = 0.0, se = 0.0;
    mean_and_error(column, mean, se);
    fit.moments.push_back(mean);
    fit.standard_errors.push_back(se);
  }
  if (sigma_scale == 0.0) return fit;  // all moments vanish; the fit stays at zero

  // Weighted least squares of log moment on log t with delta-method variances.
  double sw = 0.0, sx = 0.0, sy = 0.0;
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double rel = fit.standard_errors[i] / fit.moments[i];
    x.push_back(std::log(fit.horizons[i]));
    y.push_back(std::log(fit.moments[i]));
    w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
    sw += w.back();
    sx += w.back() * x.back();
    sy += w.back() * y.back();
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.slope_standard_error = std::sqrt(1.0 / sxx);
  fit.ci_lo = fit.slope - 1.96 * fit.slope_standard_error;
  fit.ci_hi = fit.slope + 1.96 * fit.slope_standard_error;
  return fit;
}

void write_moment_report_csv(const std::string& path, const MomentBoundReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, "");
  out << "t,lhs,rhs,ratio\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.times.size(); ++i)
    out << report.times[i] << ',' << report.lhs[i] << ',' << report.rhs[i] << ',' << report.ratio[i] << '\n';
  if (!out) throw IoError("write failed for " + path, "");
}

}  // namespace srde
