// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/qtable.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace fdbeam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr char kMagic[4] = {'F', 'D', 'B', 'Q'};
constexpr std::uint16_t kVersion = 1;

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Newton iteration on P_n from the Chebyshev-like initial guesses.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

// t - tau(t) without cancellation.
double focus_lag(double t, double theta, double gamma) {
  const double s = std::sin(theta);
  const double radicand = t * t - 4.0 * gamma * t * s + 4.0 * gamma * gamma;
  const double r = std::sqrt(std::max(radicand, 0.0));
  if (t + r == 0.0) return 0.0;
  return 2.0 * gamma * (t * s - gamma) / (t + r);
}

// End of the integration range in focused time: T_B, clipped so that tau stays inside one DFT period.
double integration_end(double gamma, double theta, double support, double period) {
  if (delay_map(support, theta, gamma) <= period) return support;
  return std::min(support, delay_map_inverse(period, theta, gamma));
}

// Quadrature nodes (t_j, w_j) covering [0, t_end].
//
// Panels hold at most `cycles_per_panel` cycles of the bounding phase (n_max tau + k_max D) / T and
// are no wider than the distance to the complex branch points of the square root near t = 2 gamma sin.
void panel_nodes(double gamma, double theta, double t_end, double period, double n_max, double k_max,
                 const QuadratureOptions& options, std::vector<double>& t_nodes, std::vector<double>& w_nodes) {
  t_nodes.clear();
  w_nodes.clear();
  if (!(t_end > 0.0)) return;
  const GaussLegendre rule = gauss_legendre(options.nodes_per_panel);
  const double s = std::sin(theta);
  const double c = std::cos(theta);

  auto phase = [&](double t) {
    const double lag = focus_lag(t, theta, gamma);
    return (n_max * (t - lag) + k_max * lag) / period;
  };
  // dense monotone table for inverting the phase
  constexpr int kTable = 4096;
  std::vector<double> table_t(kTable + 1);
  std::vector<double> table_phase(kTable + 1);
  for (int i = 0; i <= kTable; ++i) {
    const double x = static_cast<double>(i) / kTable;
    table_t[static_cast<std::size_t>(i)] = t_end * x * x;
    table_phase[static_cast<std::size_t>(i)] = phase(table_t[static_cast<std::size_t>(i)]);
  }
  for (int i = 1; i <= kTable; ++i) {
    table_phase[static_cast<std::size_t>(i)] =
        std::max(table_phase[static_cast<std::size_t>(i)], table_phase[static_cast<std::size_t>(i - 1)]);
  }
  auto phase_inverse = [&](double target) {
    if (target >= table_phase.back()) return t_end;
    const auto it = std::upper_bound(table_phase.begin(), table_phase.end(), target);
    const std::size_t hi = static_cast<std::size_t>(it - table_phase.begin());
    const std::size_t lo = hi - 1;
    const double span = table_phase[hi] - table_phase[lo];
    const double frac = span > 0.0 ? (target - table_phase[lo]) / span : 1.0;
    return table_t[lo] + frac * (table_t[hi] - table_t[lo]);
  };

  const double pole_t = 2.0 * gamma * s;
  const double pole_height = 2.0 * std::abs(gamma) * c;
  double t = 0.0;
  while (t < t_end) {
    double next = phase_inverse(phase(t) + options.cycles_per_panel);
    if (gamma != 0.0) next = std::min(next, t + std::max(std::abs(t - pole_t), pole_height));
    if (next <= t) next = t_end;
    if (next > t_end || t_end - next < 1e-12 * t_end) next = t_end;
    const double half = 0.5 * (next - t);
    const double mid = 0.5 * (next + t);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      t_nodes.push_back(mid + half * rule.nodes[q]);
      w_nodes.push_back(half * rule.weights[q]);
    }
    t = next;
  }
}

// Q[k_pos, n - first] for every k in `indices` by Gauss-Legendre panels in focused time.
Eigen::MatrixXcd panel_coefficients(double gamma, double theta, std::span<const int> indices, int first, int last,
                                    double period, double t_end, const QuadratureOptions& options) {
  const Eigen::Index rows = static_cast<Eigen::Index>(indices.size());
  const Eigen::Index cols = last - first + 1;
  double k_max = 0.0;
  for (int k : indices) k_max = std::max(k_max, std::abs(static_cast<double>(k)));
  const double n_max = std::max(std::abs(static_cast<double>(first)), std::abs(static_cast<double>(last)));

  std::vector<double> t_nodes;
  std::vector<double> w_nodes;
  panel_nodes(gamma, theta, t_end, period, std::max(n_max, 1.0), k_max, options, t_nodes, w_nodes);
  const Eigen::Index nodes = static_cast<Eigen::Index>(t_nodes.size());
  if (nodes == 0) return Eigen::MatrixXcd::Zero(rows, cols);

  Eigen::MatrixXcd lag_phase(rows, nodes);
  Eigen::MatrixXcd delay_phase(nodes, cols);
  for (Eigen::Index j = 0; j < nodes; ++j) {
    const double t = t_nodes[static_cast<std::size_t>(j)];
    const double lag = focus_lag(t, theta, gamma);
    const double tau = t - lag;

    const cplx tau_step = std::polar(1.0, -kTwoPi * tau / period);
    cplx z = std::polar(w_nodes[static_cast<std::size_t>(j)], -kTwoPi * first * tau / period);
    for (Eigen::Index col = 0; col < cols; ++col) {
      delay_phase(j, col) = z;
      z *= tau_step;
    }

    const cplx lag_step = std::polar(1.0, -kTwoPi * lag / period);
    cplx y{};
    for (Eigen::Index row = 0; row < rows; ++row) {
      const int k = indices[static_cast<std::size_t>(row)];
      const bool contiguous = row > 0 && k == indices[static_cast<std::size_t>(row - 1)] + 1 && row % 64 != 0;
      y = contiguous ? y * lag_step : std::polar(1.0, -kTwoPi * k * lag / period);
      lag_phase(row, j) = y;
    }
  }
  Eigen::MatrixXcd q = lag_phase * delay_phase;
  q /= period;
  return q;
}

// Q[n] for n in [first, last] from samples of q on a uniform midpoint grid and one FFT.
std::vector<cplx> uniform_fft_coefficients(double gamma, double theta, int k, int first, int last,
                                           const ImagingSetup& setup, double support,
                                           const QuadratureOptions& options) {
  const double period = setup.dft_period();
  const std::size_t grid = options.grid_oversample * setup.samples_per_line();
  if (static_cast<double>(grid) / (setup.carrier * period) < 4.0)
    throw std::invalid_argument("quadrature grid has fewer than 4 points per carrier period");
  if (static_cast<long>(grid) <= static_cast<long>(last) - static_cast<long>(first))
    throw std::invalid_argument("quadrature grid is shorter than the requested tap window");

  const double h = period / static_cast<double>(grid);
  const double pole = gamma * std::sin(theta);
  std::vector<cplx> samples(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double u = (static_cast<double>(i) + 0.5) * h;
    if (std::abs(u - pole) < 1e-12 * period) continue;
    samples[i] = distortion_function(u, k, gamma, theta, support, period);
  }
  std::vector<cplx> spectrum(grid);
  complex_fft(grid).forward(samples, spectrum);

  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  const long g = static_cast<long>(grid);
  for (int n = first; n <= last; ++n) {
    const long bin = ((static_cast<long>(n) % g) + g) % g;
    // midpoint offset of half a grid step
    const cplx shift = std::polar(1.0, -std::numbers::pi * n / static_cast<double>(grid));
    out.push_back(spectrum[static_cast<std::size_t>(bin)] * shift / static_cast<double>(grid));
  }
  return out;
}

void check_indices(std::span<const int> indices, std::size_t n) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int k = indices[i];
    if (k < 0 || 2 * static_cast<std::size_t>(k) >= n) {
      std::ostringstream msg;
      msg << "beam index " << k << " outside [0, N/2) for N = " << n;
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

TruncationPolicy TruncationPolicy::window(int n1, int n2) {
  TruncationPolicy policy;
  policy.kind = Kind::window;
  policy.below = n1;
  policy.above = n2;
  policy.validate();
  return policy;
}

TruncationPolicy TruncationPolicy::top_k(int k) {
  TruncationPolicy policy;
  policy.kind = Kind::top_k;
  policy.count = k;
  policy.validate();
  return policy;
}

int TruncationPolicy::margin() const { return kind == Kind::window ? below + above : count; }

int TruncationPolicy::nominal_below() const { return kind == Kind::window ? below : count / 2; }

int TruncationPolicy::nominal_above() const { return kind == Kind::window ? above : count - count / 2; }

int TruncationPolicy::first_candidate() const { return kind == Kind::window ? -below : -search_below; }

int TruncationPolicy::last_candidate() const { return kind == Kind::window ? above : search_above; }

void TruncationPolicy::validate() const {
  if (kind == Kind::window) {
    if (below < 0 || above < 0) throw std::invalid_argument("truncation window bounds must be non-negative");
  } else if (kind == Kind::top_k) {
    if (count < 1) throw std::invalid_argument("top-K truncation needs K >= 1");
    if (search_below < 0 || search_above < 0) throw std::invalid_argument("top-K search window must be non-negative");
    if (search_below + search_above + 1 < count) throw std::invalid_argument("top-K search window smaller than K");
  } else {
    throw std::invalid_argument("unknown truncation policy kind");
  }
}

cplx distortion_function(double u, int k, double gamma, double theta, double support, double period) {
  const double upper = std::min(delay_map(support, theta, gamma), period);
  if (u < std::abs(gamma) || u >= upper) return {};
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double v = u - gamma * s;
  const double jacobian = 1.0 + gamma * gamma * c * c / (v * v);
  const double phase = kTwoPi * k * gamma * (gamma - u * s) / (v * period);
  return std::polar(jacobian, phase);
}

double distortion_energy(double gamma, double theta, double support, double period) {
  const double t_end = integration_end(gamma, theta, support, period);
  const double upper = delay_map(t_end, theta, gamma);
  const double lower = std::abs(gamma);
  if (!(upper > lower)) return 0.0;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double g = gamma * gamma * c * c;
  if (g == 0.0) return (upper - lower) / period;
  // antiderivative of (1 + g / v^2)^2 with v = u - gamma sin
  auto primitive = [g](double v) { return v - 2.0 * g / v - g * g / (3.0 * v * v * v); };
  return (primitive(upper - gamma * s) - primitive(lower - gamma * s)) / period;
}

std::vector<cplx> distortion_coefficients(double gamma, double theta, int k, int first, int last,
                                          const ImagingSetup& setup, double support,
                                          const QuadratureOptions& options) {
  if (last < first) throw std::invalid_argument("empty tap window");
  if (options.method == QuadratureMethod::uniform_fft)
    return uniform_fft_coefficients(gamma, theta, k, first, last, setup, support, options);
  const double period = setup.dft_period();
  const double t_end = integration_end(gamma, theta, support, period);
  const int one[1] = {k};
  const Eigen::MatrixXcd q = panel_coefficients(gamma, theta, one, first, last, period, t_end, options);
  return std::vector<cplx>(q.data(), q.data() + q.size());
}

std::span<const int> QTable::taps_of(std::size_t k_pos, std::size_t m) const {
  const std::size_t r = run(k_pos, m);
  return std::span<const int>(taps).subspan(offsets[r], offsets[r + 1] - offsets[r]);
}

std::span<const cplx> QTable::weights_of(std::size_t k_pos, std::size_t m) const {
  const std::size_t r = run(k_pos, m);
  return std::span<const cplx>(weights).subspan(offsets[r], offsets[r + 1] - offsets[r]);
}

std::optional<std::size_t> QTable::position(int k) const {
  const auto it = std::lower_bound(beam_indices.begin(), beam_indices.end(), k);
  if (it == beam_indices.end() || *it != k) return std::nullopt;
  return static_cast<std::size_t>(it - beam_indices.begin());
}

QTable QTable::subset(std::span<const int> indices) const {
  std::vector<int> wanted(indices.begin(), indices.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  QTable out;
  out.theta = theta;
  out.key = key;
  out.policy = policy;
  out.elements = elements;
  out.length = length;
  out.beam_indices = wanted;
  out.offsets.push_back(0);
  for (int k : wanted) {
    const auto pos = position(k);
    if (!pos) throw std::out_of_range("Q table has no entry for beam index " + std::to_string(k));
    for (std::size_t m = 0; m < elements; ++m) {
      const auto t = taps_of(*pos, m);
      const auto w = weights_of(*pos, m);
      out.taps.insert(out.taps.end(), t.begin(), t.end());
      out.weights.insert(out.weights.end(), w.begin(), w.end());
      out.kept_energy.push_back(kept_energy[run(*pos, m)]);
      out.offsets.push_back(static_cast<std::uint32_t>(out.taps.size()));
    }
  }
  return out;
}

double QTable::mean_kept_energy(std::span<const int> indices) const {
  if (indices.empty()) {
    if (kept_energy.empty()) return 0.0;
    return std::accumulate(kept_energy.begin(), kept_energy.end(), 0.0) / static_cast<double>(kept_energy.size());
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int k : indices) {
    const auto pos = position(k);
    if (!pos) throw std::out_of_range("Q table has no entry for beam index " + std::to_string(k));
    for (std::size_t m = 0; m < elements; ++m) {
      sum += kept_energy[run(*pos, m)];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

int QTable::min_tap() const { return taps.empty() ? 0 : *std::min_element(taps.begin(), taps.end()); }

int QTable::max_tap() const { return taps.empty() ? 0 : *std::max_element(taps.begin(), taps.end()); }

std::uint64_t qtable_key(const TransducerArray& array, const ImagingSetup& setup, double theta,
                         const TruncationPolicy& policy, const QuadratureOptions& options) {
  detail::Fnv1a h;
  h.u64(array.element_offsets.size());
  for (double x : array.element_offsets) h.f64(x);
  h.u64(array.reference_index);
  h.f64(setup.speed_of_sound);
  h.f64(setup.depth);
  h.f64(setup.carrier);
  h.f64(setup.bandwidth);
  h.f64(setup.sample_rate);
  h.f64(theta);
  h.i64(static_cast<int>(policy.kind));
  h.i64(policy.below);
  h.i64(policy.above);
  h.i64(policy.count);
  h.i64(policy.search_below);
  h.i64(policy.search_above);
  h.i64(static_cast<int>(options.method));
  h.i64(options.nodes_per_panel);
  h.f64(options.cycles_per_panel);
  h.u64(options.grid_oversample);
  return h.value();
}

QTable compute_q_table(const TransducerArray& array, const ImagingSetup& setup, double theta,
                       std::span<const int> beam_indices, const TruncationPolicy& policy,
                       const QuadratureOptions& options) {
  array.validate();
  setup.validate();
  policy.validate();
  if (!(std::abs(theta) < 0.5 * std::numbers::pi)) throw std::invalid_argument("steering angle must satisfy |theta| < pi/2");
  if (options.nodes_per_panel < 2 || !(options.cycles_per_panel > 0.0))
    throw std::invalid_argument("invalid quadrature options");
  const std::size_t n = setup.samples_per_line();
  check_indices(beam_indices, n);

  QTable table;
  table.theta = theta;
  table.key = qtable_key(array, setup, theta, policy, options);
  table.policy = policy;
  table.elements = array.size();
  table.length = n;
  table.beam_indices.assign(beam_indices.begin(), beam_indices.end());
  std::sort(table.beam_indices.begin(), table.beam_indices.end());
  table.beam_indices.erase(std::unique(table.beam_indices.begin(), table.beam_indices.end()), table.beam_indices.end());

  const std::size_t rows = table.beam_indices.size();
  const std::size_t m_count = array.size();
  const int first = policy.first_candidate();
  const int last = policy.last_candidate();
  const int width = last - first + 1;
  const int keep = policy.kind == TruncationPolicy::Kind::top_k ? policy.count : width;
  const double period = setup.dft_period();
  const double support = beam_support(theta, array, setup);
  const std::vector<double> gammas = array.gammas(setup.speed_of_sound);

  // coefficients for all (k, m) before truncation: runs are stored k-major, so keep one matrix per element
  std::vector<Eigen::MatrixXcd> per_element(m_count);
  std::vector<double> energy(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    energy[m] = distortion_energy(gammas[m], theta, support, period);
    if (options.method == QuadratureMethod::phase_panels) {
      const double t_end = integration_end(gammas[m], theta, support, period);
      per_element[m] = panel_coefficients(gammas[m], theta, table.beam_indices, first, last, period, t_end, options);
    } else {
      per_element[m].resize(static_cast<Eigen::Index>(rows), width);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto q = uniform_fft_coefficients(gammas[m], theta, table.beam_indices[r], first, last, setup, support, options);
        for (int c = 0; c < width; ++c) per_element[m](static_cast<Eigen::Index>(r), c) = q[static_cast<std::size_t>(c)];
      }
    }
  }

  table.offsets.reserve(rows * m_count + 1);
  table.offsets.push_back(0);
  table.taps.reserve(rows * m_count * static_cast<std::size_t>(keep));
  table.weights.reserve(rows * m_count * static_cast<std::size_t>(keep));
  table.kept_energy.reserve(rows * m_count);
  std::vector<int> order(static_cast<std::size_t>(width));
  std::vector<double> power(static_cast<std::size_t>(width));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const Eigen::MatrixXcd& q = per_element[m];
      for (int c = 0; c < width; ++c) power[static_cast<std::size_t>(c)] = std::norm(q(static_cast<Eigen::Index>(r), c));
      std::iota(order.begin(), order.end(), 0);
      if (keep < width) {
        // ties broken by the smaller tap magnitude |n|, then by n
        std::nth_element(order.begin(), order.begin() + keep, order.end(), [&](int a, int b) {
          const double pa = power[static_cast<std::size_t>(a)];
          const double pb = power[static_cast<std::size_t>(b)];
          if (pa != pb) return pa > pb;
          const int na = std::abs(a + first);
          const int nb = std::abs(b + first);
          return na != nb ? na < nb : a < b;
        });
        std::sort(order.begin(), order.begin() + keep);
      }
      double kept = 0.0;
      for (int i = 0; i < keep; ++i) {
        const int c = order[static_cast<std::size_t>(i)];
        table.taps.push_back(c + first);
        table.weights.push_back(q(static_cast<Eigen::Index>(r), c));
        kept += power[static_cast<std::size_t>(c)];
      }
      table.kept_energy.push_back(energy[m] > 0.0 ? kept / energy[m] : 1.0);
      table.offsets.push_back(static_cast<std::uint32_t>(table.taps.size()));
    }
  }
  return table;
}

void save_q_table(const QTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  detail::write_u16(out, kVersion);
  detail::write_u16(out, 0);
  detail::write_u64(out, table.key);
  detail::write_f64(out, table.theta);
  detail::write_i32(out, static_cast<std::int32_t>(table.policy.kind));
  detail::write_i32(out, table.policy.below);
  detail::write_i32(out, table.policy.above);
  detail::write_i32(out, table.policy.count);
  detail::write_i32(out, table.policy.search_below);
  detail::write_i32(out, table.policy.search_above);
  detail::write_u32(out, static_cast<std::uint32_t>(table.elements));
  detail::write_u32(out, static_cast<std::uint32_t>(table.length));
  detail::write_u32(out, static_cast<std::uint32_t>(table.beam_indices.size()));
  detail::write_u64(out, table.taps.size());
  for (int k : table.beam_indices) detail::write_i32(out, k);
  for (std::uint32_t o : table.offsets) detail::write_u32(out, o);
  for (double e : table.kept_energy) detail::write_f64(out, e);
  for (int n : table.taps) detail::write_i32(out, n);
  for (const cplx& w : table.weights) {
    detail::write_f64(out, w.real());
    detail::write_f64(out, w.imag());
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

QTable load_q_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  detail::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic)) throw std::runtime_error(path.string() + " is not a Q table file");
  const std::uint16_t version = detail::read_u16(in, "version");
  if (version != kVersion) throw std::runtime_error("unsupported Q table version " + std::to_string(version));
  detail::read_u16(in, "reserved");

  QTable table;
  table.key = detail::read_u64(in, "key");
  table.theta = detail::read_f64(in, "theta");
  const std::int32_t kind = detail::read_i32(in, "policy");
  if (kind != 0 && kind != 1) throw std::runtime_error("unknown truncation policy in " + path.string());
  table.policy.kind = static_cast<TruncationPolicy::Kind>(kind);
  table.policy.below = detail::read_i32(in, "policy");
  table.policy.above = detail::read_i32(in, "policy");
  table.policy.count = detail::read_i32(in, "policy");
  table.policy.search_below = detail::read_i32(in, "policy");
  table.policy.search_above = detail::read_i32(in, "policy");
  table.elements = detail::read_u32(in, "header");
  table.length = detail::read_u32(in, "header");
  const std::size_t rows = detail::read_u32(in, "header");
  const std::uint64_t tap_count = detail::read_u64(in, "header");
  const std::size_t runs = rows * table.elements;
  // guard against absurd allocations from a corrupt header
  if (tap_count > (1ull << 32) || runs > (1ull << 32)) throw std::runtime_error("corrupt Q table header");

  table.beam_indices.resize(rows);
  for (auto& k : table.beam_indices) k = detail::read_i32(in, "indices");
  table.offsets.resize(runs + 1);
  for (auto& o : table.offsets) o = detail::read_u32(in, "offsets");
  table.kept_energy.resize(runs);
  for (auto& e : table.kept_energy) e = detail::read_f64(in, "energy");
  table.taps.resize(tap_count);
  for (auto& n : table.taps) n = detail::read_i32(in, "taps");
  table.weights.resize(tap_count);
  for (auto& w : table.weights) {
    const double re = detail::read_f64(in, "weights");
    const double im = detail::read_f64(in, "weights");
    w = cplx(re, im);
  }
  if (table.offsets.front() != 0 || table.offsets.back() != tap_count ||
      !std::is_sorted(table.offsets.begin(), table.offsets.end()))
    throw std::runtime_error("inconsistent run offsets in " + path.string());
  return table;
}

QTable cached_q_table(const std::filesystem::path& dir, const TransducerArray& array, const ImagingSetup& setup,
                      double theta, std::span<const int> beam_indices, const TruncationPolicy& policy,
                      const QuadratureOptions& options) {
  const std::uint64_t key = qtable_key(array, setup, theta, policy, options);
  std::ostringstream name;
  name << "q_" << std::hex << std::setw(16) << std::setfill('0') << key << ".fdbq";
  const std::filesystem::path path = dir / name.str();
  if (std::filesystem::exists(path)) {
    try {
      QTable cached = load_q_table(path);
      if (cached.key == key) return cached.subset(beam_indices);
    } catch (const std::exception&) {
      // stale, corrupt or too small: recompute below
    }
  }
  QTable table = compute_q_table(array, setup, theta, beam_indices, policy, options);
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  save_q_table(table, tmp);
  std::filesystem::rename(tmp, path);
  return table;
}

}  // namespace fdbeam
