#include "qpgrating/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace qpg {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre needs n >= 1");
  std::vector<double> x(n), w(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = mid - half * z;
    x[n - 1 - i] = mid + half * z;
    w[i] = w[n - 1 - i] = half * wi;
  }
  if (n % 2 == 1) x[n / 2] = mid;
  return {x, w};
}

namespace {

// Periodic log-singular end corrections of Alpert, "Hybrid Gauss-trapezoidal
// quadrature rules", SIAM J. Sci. Comput. 20 (1999), Table 6, re-solved in
// 60-digit arithmetic by tools/gen_alpert.py.
struct RuleTable {
  int order;
  int skip;
  int interp;
  std::vector<double> nodes, weights;
};

const RuleTable kTables[] = {
    {2, 1, 4, {1.5915494309189534e-1}, {5.0e-1}},
    {8,
     5,
     10,
     {6.5318157085679183e-3, 9.0867445846577286e-2, 3.9679665333758777e-1, 1.0278566405256457,
      1.945288592909266, 2.9801479338896397, 3.998861349951123},
     {2.4621941989952032e-2, 1.7013158668541781e-1, 4.6092563586500772e-1, 7.9472911486218943e-1,
      1.0087104143379326, 1.0360936497262156, 1.0047876565332848}},
    {16,
     10,
     20,
     {8.3715298320141133e-4, 1.239382725542637e-2, 6.0092907857394678e-2, 1.8059912496019279e-1,
      4.1428325990280309e-1, 7.9647477311124298e-1, 1.3489938824670588, 2.073471660264395,
      2.9479049390314938, 3.9281292522486117, 4.9572030865631117, 5.9863601139774942,
      6.9979577047915193, 7.9998887575246224, 8.9999987543061196},
     {3.1909190866262344e-3, 2.423621380426338e-2, 7.7401355216530879e-2, 1.7048894202863691e-1,
      3.0291234785113086e-1, 4.6522208349146167e-1, 6.4014896370967684e-1, 8.0512129461810612e-1,
      9.3624119456986465e-1, 1.0143597753690752, 1.0351677210536568, 1.0203086249846104,
      1.004798397441514, 1.0003950173523093, 1.0000071494225369}},
};

AuxNode make_aux(double shift, double weight, int q) {
  AuxNode a{shift, weight, {}, {}};
  const int start = static_cast<int>(std::floor(shift)) - q / 2 + 1;
  for (int j = 0; j < q; ++j) a.offsets.push_back(start + j);
  // Lagrange basis at shift over the integer nodes start..start+q-1.
  for (int j = 0; j < q; ++j) {
    double l = 1.0;
    for (int m = 0; m < q; ++m)
      if (m != j) l *= (shift - a.offsets[m]) / static_cast<double>(a.offsets[j] - a.offsets[m]);
    a.lagrange.push_back(l);
  }
  return a;
}

CorrectionRule build_rule(const RuleTable& t) {
  CorrectionRule r;
  r.order = t.order;
  r.skip = t.skip;
  r.nodes = t.nodes;
  r.weights = t.weights;
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    r.aux.push_back(make_aux(t.nodes[k], t.weights[k], t.interp));
    r.aux.push_back(make_aux(-t.nodes[k], t.weights[k], t.interp));
  }
  return r;
}

}  // namespace

const CorrectionRule& alpert_rule(int order) {
  static const std::map<int, CorrectionRule> rules = [] {
    std::map<int, CorrectionRule> m;
    for (const auto& t : kTables) m.emplace(t.order, build_rule(t));
    return m;
  }();
  const auto it = rules.find(order);
  if (it == rules.end()) throw std::invalid_argument("no correction rule of the requested order");
  return it->second;
}

RuleSelfTest correction_rule_selftest(const CorrectionRule& rule, std::vector<int> sizes) {
  // h(t) = 1 / (a - cos 2 pi t) has Fourier coefficients r^|m| / s, so
  // int h = 1/s and int h log|2 sin pi(t - t0)| = log|1 - r e^{2 pi i t0}| / s.
  const double a = 1.1;
  const double s = std::sqrt(a * a - 1.0), r = a - s;
  auto dens = [&](double t) { return 1.0 / (a - std::cos(2.0 * kPi * t)); };
  RuleSelfTest out;
  out.sizes = sizes;
  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const int n = sizes[idx];
    const double h = 1.0 / n;
    const int i = n / 3;
    const double t0 = i * h;
    auto apply = [&](auto kern) {
      double sum = 0.0;
      for (int g = i - n / 2; g < i - n / 2 + n; ++g)
        if (std::abs(g - i) >= rule.skip) sum += h * kern(g * h) * dens(g * h);
      for (const auto& ax : rule.aux) {
        double f = 0.0;
        for (std::size_t q = 0; q < ax.offsets.size(); ++q) f += ax.lagrange[q] * dens((i + ax.offsets[q]) * h);
        sum += h * ax.weight * kern(t0 + ax.shift * h) * f;
      }
      return sum;
    };
    const double logq = apply([&](double t) { return std::log(std::abs(2.0 * std::sin(kPi * (t - t0)))); });
    const double exact = std::log(std::abs(1.0 - std::polar(r, 2.0 * kPi * t0))) / s;
    out.errors.push_back(std::abs(logq - exact));
    if (idx + 1 == sizes.size()) out.smooth_error = std::abs(apply([](double) { return 1.0; }) - 1.0 / s);
  }
  const double floor_err = 1e-13;
  for (std::size_t idx = 0; idx + 1 < sizes.size(); ++idx) {
    if (out.errors[idx + 1] < floor_err) break;
    out.observed_order = std::log(out.errors[idx] / out.errors[idx + 1]) /
                         std::log(static_cast<double>(sizes[idx + 1]) / sizes[idx]);
  }
  out.max_error = std::max(out.errors.back(), out.smooth_error);
  return out;
}

}  // namespace qpg
