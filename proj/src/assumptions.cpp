#include "tdvarma/assumptions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "tdvarma/asymptotics.hpp"
#include "tdvarma/repr.hpp"

namespace tdvarma {

namespace {

constexpr double kTrendFactor = 1.01;
constexpr double kNegligible = 1e-14;
constexpr double kH37SlopeLimit = 0.25;

double sq(double x) { return x * x; }

struct DecayFit {
  bool any = false;
  bool finite = true;
  double phi = 0.0;
};

// Least-squares slope of log S(nu) against nu over the positive grid values.
DecayFit fit_decay(const std::vector<int>& nu, const std::vector<double>& s) {
  DecayFit out;
  std::vector<double> xs, ys;
  for (std::size_t a = 0; a < nu.size(); ++a) {
    if (!std::isfinite(s[a])) {
      out.finite = false;
      return out;
    }
    if (s[a] > 0) {
      xs.push_back(nu[a]);
      ys.push_back(std::log(s[a]));
    }
  }
  if (xs.empty()) return out;
  out.any = true;
  if (xs.size() == 1) {
    out.phi = 0.0;
    return out;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    sxy += (xs[a] - mx) * (ys[a] - my);
    sxx += (xs[a] - mx) * (xs[a] - mx);
  }
  out.phi = std::exp(sxy / sxx);
  return out;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

bool AssumptionReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second == Verdict::Pass; });
}

Eigen::MatrixXd commutation_matrix(int r) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(r * r, r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) K(j + i * r, i + j * r) = 1.0;
  return K;
}

Eigen::MatrixXd gaussian_kappa(const Eigen::MatrixXd& s) {
  const int r = static_cast<int>(s.rows());
  Eigen::MatrixXd kappa(r * r, r * r);
  for (int b = 0; b < r; ++b)
    for (int a = 0; a < r; ++a)
      for (int d = 0; d < r; ++d)
        for (int c = 0; c < r; ++c)
          kappa(a + b * r, c + d * r) = s(a, b) * s(c, d) + s(a, c) * s(b, d) + s(a, d) * s(b, c);
  return kappa;
}

Eigen::MatrixXd fourth_cumulant_residual(const Eigen::MatrixXd& kappa, const Eigen::MatrixXd& sigma) {
  const int r = static_cast<int>(sigma.rows());
  const Eigen::Map<const Eigen::VectorXd> vs(sigma.data(), r * r);
  const Eigen::MatrixXd ss = Eigen::kroneckerProduct(sigma, sigma).eval();
  return kappa - vs * vs.transpose() - ss - commutation_matrix(r) * ss;
}

double gaussian_quadratic_moment(const Eigen::MatrixXd& sigma, int j) {
  if (j < 1 || j > 4) throw ContractError("quadratic-form moments are available for orders 1..4");
  const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma).eigenvalues();
  // cumulants of sum_i lam_i z_i^2: c_k = 2^{k-1} (k-1)! sum_i lam_i^k
  std::array<double, 5> c{}, mu{};
  double fact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    if (k > 1) fact *= (k - 1);
    c[k] = std::pow(2.0, k - 1) * fact * lam.array().pow(k).sum();
  }
  mu[0] = 1.0;
  for (int n = 1; n <= 4; ++n) {
    double acc = 0.0;
    double binom = 1.0;  // C(n-1, k-1)
    for (int k = 1; k <= n; ++k) {
      acc += binom * c[k] * mu[n - k];
      binom = binom * (n - k) / k;
    }
    mu[n] = acc;
  }
  return mu[j];
}

bool trending_upward(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 10) return false;
  const std::size_t cut = n - std::max<std::size_t>(1, n / 10);
  const double head = *std::max_element(series.begin(), series.begin() + static_cast<long>(cut));
  const double tail = *std::max_element(series.begin() + static_cast<long>(cut), series.end());
  return tail > kTrendFactor * head;
}

CheckResult check_h32(const Modeld& model, const Eigen::VectorXd& theta0, int n_probe, const std::vector<int>& nu_grid) {
  CheckResult res;
  if (nu_grid.empty() || n_probe < *std::max_element(nu_grid.begin(), nu_grid.end()) + 2) {
    res.note = "probe horizon too short for the nu grid";
    return res;
  }
  PsiDerivativeStream<double> stream(model, theta0, theta0, n_probe, 3);
  const auto& idx = stream.index();
  const int slots = idx->num_slots();
  const std::size_t g = nu_grid.size();

  // max over t of tail sums, per slot and grid point, for squared and fourth powers
  std::vector<std::vector<double>> s2(static_cast<std::size_t>(slots), std::vector<double>(g, 0.0));
  std::vector<std::vector<double>> s4 = s2;
  std::vector<double> n5(static_cast<std::size_t>(slots), 0.0);
  std::array<std::vector<double>, 4> total;
  int last_nonzero = 0;

  std::vector<double> q;
  for (int t = 1; t <= n_probe; ++t) {
    const auto row = stream.deriv_row(t);
    const int len = static_cast<int>(row.size());
    std::array<double, 4> tot{0, 0, 0, 0};
    for (int s = 1; s < slots; ++s) {
      const int ord = idx->order_of(s);
      q.assign(static_cast<std::size_t>(len + 1), 0.0);
      bool any = false;
      for (int k = 1; k <= len; ++k) {
        const auto& jet = row[static_cast<std::size_t>(k - 1)];
        if (jet.is_zero(s)) continue;
        q[static_cast<std::size_t>(k)] = jet.raw(s).squaredNorm();
        any = true;
        if (ord == 1 && std::sqrt(q[static_cast<std::size_t>(k)]) > kNegligible) last_nonzero = std::max(last_nonzero, k);
      }
      if (!any) continue;
      // suffix sums
      std::vector<double> suf2(static_cast<std::size_t>(len + 2), 0.0), suf4 = suf2;
      for (int k = len; k >= 1; --k) {
        suf2[static_cast<std::size_t>(k)] = suf2[static_cast<std::size_t>(k + 1)] + q[static_cast<std::size_t>(k)];
        suf4[static_cast<std::size_t>(k)] = suf4[static_cast<std::size_t>(k + 1)] + sq(q[static_cast<std::size_t>(k)]);
      }
      tot[static_cast<std::size_t>(ord)] += suf2[1];
      if (ord == 3) {
        n5[static_cast<std::size_t>(s)] = std::max(n5[static_cast<std::size_t>(s)], suf2[1]);
        continue;
      }
      for (std::size_t a = 0; a < g; ++a) {
        const int nu = nu_grid[a];
        if (nu > len) continue;
        s2[static_cast<std::size_t>(s)][a] = std::max(s2[static_cast<std::size_t>(s)][a], suf2[static_cast<std::size_t>(nu)]);
        s4[static_cast<std::size_t>(s)][a] = std::max(s4[static_cast<std::size_t>(s)][a], suf4[static_cast<std::size_t>(nu)]);
      }
    }
    for (int o = 1; o <= 3; ++o) total[static_cast<std::size_t>(o)].push_back(tot[static_cast<std::size_t>(o)]);
  }

  bool finite = true, decays = true;
  double phi = 0.0;
  for (int s = 1; s < slots; ++s) {
    if (idx->order_of(s) == 3) continue;
    for (const auto* table : {&s2, &s4}) {
      const DecayFit f = fit_decay(nu_grid, (*table)[static_cast<std::size_t>(s)]);
      finite = finite && f.finite;
      if (!f.any) continue;
      decays = decays && f.phi < 1.0;
      if (table == &s2) phi = std::max(phi, f.phi);
    }
  }
  std::array<double, 5> N{0, 0, 0, 0, 0};
  for (int s = 1; s < slots; ++s) {
    const int ord = idx->order_of(s);
    if (ord == 3) {
      N[4] = std::max(N[4], n5[static_cast<std::size_t>(s)]);
      continue;
    }
    for (std::size_t a = 0; a < g; ++a) {
      const double scale = phi > 0 ? std::pow(phi, nu_grid[a] - 1) : 1.0;
      const std::size_t base = ord == 1 ? 0 : 2;
      N[base] = std::max(N[base], s2[static_cast<std::size_t>(s)][a] / scale);
      N[base + 1] = std::max(N[base + 1], s4[static_cast<std::size_t>(s)][a] / scale);
    }
  }
  bool trend = false;
  for (int o = 1; o <= 3; ++o) {
    for (double v : total[static_cast<std::size_t>(o)]) finite = finite && std::isfinite(v);
    trend = trend || trending_upward(total[static_cast<std::size_t>(o)]);
  }
  for (double v : N) finite = finite && std::isfinite(v);

  res.constants["Phi"] = phi;
  for (int a = 0; a < 5; ++a) res.constants["N" + std::to_string(a + 1)] = N[static_cast<std::size_t>(a)];
  res.constants["last_nonzero_k"] = last_nonzero;
  if (!finite) {
    res.verdict = Verdict::Fail;
    res.note = "psi tail sums are not finite";
  } else if (!decays) {
    res.verdict = Verdict::Fail;
    res.note = "fitted decay base is not below 1";
  } else if (trend) {
    res.verdict = Verdict::Fail;
    res.note = "psi norm sums grow with t";
  } else {
    res.verdict = Verdict::Pass;
    if (last_nonzero < n_probe - 1) {
      res.note = "psi derivatives vanish beyond k = " + std::to_string(last_nonzero);
    }
  }
  return res;
}

CheckResult check_h33_h35(const Modeld& model, const Eigen::VectorXd& theta0, int n_probe) {
  CheckResult res;
  const auto& lay = model.layout();
  std::vector<int> dirs;
  for (int i = lay.a_block + lay.b_block; i < lay.size(); ++i) dirs.push_back(i);
  auto index = std::make_shared<const DerivativeIndex>(dirs, 3);
  const char* names[] = {"K1", "K2", "K3", "K4", "K5", "m1", "m2"};
  std::array<std::vector<double>, 7> series;
  try {
    for (int t = 1; t <= n_probe; ++t) {
      const MatrixJet<double> gj = model.g().jet(t, theta0, index);
      MatrixJet<double> s = (gj * model.sigma()) * gj.transpose();
      s.symmetrize();
      const MatrixJet<double> inv = s.inverse();
      std::array<double, 7> v{0, 0, 0, 0, 0, 0, 0};
      for (int slot = 1; slot < index->num_slots(); ++slot) {
        const int ord = index->order_of(slot);
        const double ns = s.is_zero(slot) ? 0.0 : s.raw(slot).squaredNorm();
        const double ni = inv.is_zero(slot) ? 0.0 : inv.raw(slot).squaredNorm();
        if (ord == 1) {
          v[0] = std::max(v[0], ns);
          v[3] = std::max(v[3], ni);
        } else if (ord == 2) {
          v[1] = std::max(v[1], ns);
          v[4] = std::max(v[4], ni);
        } else {
          v[2] = std::max(v[2], ni);
        }
      }
      v[5] = gj.value().squaredNorm();
      v[6] = inv.value().squaredNorm();
      for (std::size_t a = 0; a < 7; ++a) series[a].push_back(v[a]);
    }
  } catch (const NumericalError& e) {
    res.verdict = Verdict::Fail;
    res.note = e.what();
    return res;
  }
  bool finite = true, trend = false;
  std::string grows;
  for (std::size_t a = 0; a < 7; ++a) {
    double mx = 0.0;
    for (double v : series[a]) {
      finite = finite && std::isfinite(v);
      mx = std::max(mx, v);
    }
    res.constants[names[a]] = mx;
    if (trending_upward(series[a])) {
      trend = true;
      grows += std::string(grows.empty() ? "" : ", ") + names[a];
    }
  }
  if (!finite) {
    res.verdict = Verdict::Fail;
    res.note = "non-finite bound";
  } else if (trend) {
    res.verdict = Verdict::Fail;
    res.note = "growing in t: " + grows;
  } else {
    res.verdict = Verdict::Pass;
  }
  return res;
}

CheckResult check_h34(const Eigen::MatrixXd& sigma) {
  CheckResult res;
  const int r = static_cast<int>(sigma.rows());
  const Eigen::MatrixXd kappa = gaussian_kappa(sigma);
  const Eigen::MatrixXd xi = fourth_cumulant_residual(kappa, sigma);
  const Eigen::Map<const Eigen::VectorXd> vs(sigma.data(), r * r);
  const Eigen::MatrixXd ss = Eigen::kroneckerProduct(sigma, sigma).eval();
  res.constants["M1"] = gaussian_quadratic_moment(sigma, 4);
  res.constants["M2"] = 0.0;  // odd Gaussian moments vanish
  res.constants["M3"] = kappa.norm() + (vs * vs.transpose()).norm() + ss.norm() + (commutation_matrix(r) * ss).norm();
  res.constants["Xi_norm"] = xi.norm();
  const bool finite = std::isfinite(res.constants["M1"]) && std::isfinite(res.constants["M3"]);
  res.verdict = finite ? Verdict::Pass : Verdict::Fail;
  res.note = "Gaussian innovations";
  return res;
}

CheckResult check_h36(const Modeld& model, const Eigen::VectorXd& theta0, const std::vector<int>& n_grid) {
  CheckResult res;
  res.verdict = Verdict::Pass;
  for (int n : n_grid) {
    const auto info = theoretical_V<double>(model, theta0, n, -1, false, false);
    const double lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info.V).eigenvalues().minCoeff();
    res.constants["min_eigenvalue_n" + std::to_string(n)] = lam;
    if (!(lam > 1e-12 * std::max(info.V.cwiseAbs().maxCoeff(), 1e-300))) {
      res.verdict = Verdict::Fail;
      res.note = "V(" + std::to_string(n) + ") is not positive definite";
    }
  }
  return res;
}

CheckResult check_h37(const Modeld& model, const Eigen::VectorXd& theta0, const std::vector<int>& n_grid,
                      std::vector<H37Point>* points) {
  CheckResult res;
  if (n_grid.size() < 2) {
    res.note = "need at least two horizons";
    return res;
  }
  const int N = *std::max_element(n_grid.begin(), n_grid.end());
  const int m = model.m();
  PsiDerivativeStream<double> stream(model, theta0, theta0, N, 1);
  const auto& idx = stream.index();

  // psi[i][t-1][k-1] for first-order directions with any nonzero entry
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> psi(static_cast<std::size_t>(m));
  std::vector<std::vector<std::vector<double>>> norm(static_cast<std::size_t>(m));
  std::vector<bool> active(static_cast<std::size_t>(m), false);
  double global = 0.0;
  for (int i = 0; i < m; ++i) {
    psi[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(N));
    norm[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(N));
  }
  for (int t = 1; t <= N; ++t) {
    const auto row = stream.deriv_row(t);
    for (int i = 0; i < m; ++i) {
      const int s = idx->first_slot(1) + i;
      auto& pr = psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)];
      auto& nr = norm[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)];
      for (const auto& jet : row) {
        pr.push_back(jet.at(s));
        nr.push_back(pr.back().norm());
        if (nr.back() > 0) active[static_cast<std::size_t>(i)] = true;
        global = std::max(global, nr.back());
      }
    }
  }
  // effective support in k
  int keff = 0;
  for (int i = 0; i < m; ++i)
    for (int t = 1; t <= N; ++t) {
      const auto& nr = norm[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)];
      for (int k = static_cast<int>(nr.size()); k >= 1; --k)
        if (nr[static_cast<std::size_t>(k - 1)] > 1e-13 * global) {
          keff = std::max(keff, k);
          break;
        }
    }
  std::vector<Eigen::MatrixXd> sig(static_cast<std::size_t>(N)), sinv(static_cast<std::size_t>(N));
  std::vector<double> g2(static_cast<std::size_t>(N));
  for (int t = 1; t <= N; ++t) {
    sig[static_cast<std::size_t>(t - 1)] = sigma_t<double>(model, t, theta0);
    sinv[static_cast<std::size_t>(t - 1)] = sig[static_cast<std::size_t>(t - 1)].inverse();
    g2[static_cast<std::size_t>(t - 1)] = model.g().value(t, theta0).squaredNorm();
  }
  const auto P = [&](int i, int t, int k) -> const Eigen::MatrixXd& {
    return psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k - 1)];
  };
  const auto nrm = [&](int i, int t, int k) {
    return norm[static_cast<std::size_t>(i)][static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k - 1)];
  };

  std::vector<H37Point> pts;
  for (int n : n_grid) {
    H37Point pt;
    pt.n = n;
    const int dmax = std::min(n - 1, keff);
    for (int i = 0; i < m; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      double sum = 0.0;
      for (int d = 1; d <= dmax; ++d)
        for (int t = 1; t <= n - d; ++t)
          for (int k = 1; k <= std::min(t - 1, keff - d); ++k)
            sum += g2[static_cast<std::size_t>(t - k - 1)] * nrm(i, t, k) * nrm(i, t + d, k + d);
      pt.first = std::max(pt.first, sum / (static_cast<double>(n) * n) * n);
    }
    for (int i = 0; i < m; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < m; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        double sum = 0.0;
        for (int d = 1; d <= dmax; ++d)
          for (int t = 1; t <= n - d; ++t) {
            const int kk = std::min(t - 1, keff - d);
            if (kk < 1) continue;
            const int r = model.r();
            Eigen::MatrixXd u1 = Eigen::MatrixXd::Zero(r, r), w1 = u1, u2 = u1, w2 = u1;
            for (int k = 1; k <= kk; ++k) {
              const Eigen::MatrixXd& s = sig[static_cast<std::size_t>(t - k - 1)];
              const Eigen::MatrixXd a = P(j, t, k) * s;
              const Eigen::MatrixXd b = P(i, t + d, k + d) * s;
              u1.noalias() += a * P(i, t + d, k + d).transpose();
              u2.noalias() += a * P(j, t + d, k + d).transpose();
              w1.noalias() += P(j, t + d, k + d) * s * P(i, t, k).transpose();
              w2.noalias() += b * P(i, t, k).transpose();
            }
            const Eigen::MatrixXd& st = sinv[static_cast<std::size_t>(t - 1)];
            const Eigen::MatrixXd& sd = sinv[static_cast<std::size_t>(t + d - 1)];
            sum += (st * u1 * sd * w1).trace() + (st * u2 * sd * w2).trace();
          }
        pt.second = std::max(pt.second, std::abs(sum) / (static_cast<double>(n) * n) * n);
      }
    }
    pts.push_back(pt);
  }

  const auto slope_ok = [&](double H37Point::*field) {
    const H37Point& a = pts[pts.size() - 2];
    const H37Point& b = pts.back();
    const double va = a.*field, vb = b.*field;
    if (!std::isfinite(va) || !std::isfinite(vb)) return false;
    if (vb <= 1e-300) return true;
    if (va <= 1e-300) return false;
    const double slope = std::log(vb / va) / std::log(static_cast<double>(b.n) / a.n);
    return slope < kH37SlopeLimit;
  };
  const bool ok1 = slope_ok(&H37Point::first);
  const bool ok2 = slope_ok(&H37Point::second);
  res.verdict = ok1 && ok2 ? Verdict::Pass : Verdict::Fail;
  res.constants["k_support"] = keff;
  res.constants["n_first_sum_at_max_n"] = pts.back().first;
  res.constants["n_second_sum_at_max_n"] = pts.back().second;
  res.note = "Gaussian innovations: fourth-cumulant term is zero";
  if (!ok1) res.note += "; first sum is not O(1/n)";
  if (!ok2) res.note += "; second sum is not O(1/n)";
  if (points) *points = pts;
  return res;
}

AssumptionReport audit_assumptions(const Modeld& model, const Eigen::VectorXd& theta0, const AuditOptions& options) {
  auto f32 = std::async(std::launch::async, [&] { return check_h32(model, theta0, options.n_probe, options.nu_grid); });
  auto f33 = std::async(std::launch::async, [&] { return check_h33_h35(model, theta0, options.n_probe); });
  auto f36 = std::async(std::launch::async, [&] { return check_h36(model, theta0, options.h36_grid); });
  std::vector<H37Point> pts;
  auto f37 = std::async(std::launch::async, [&] { return check_h37(model, theta0, options.h37_grid, &pts); });
  const CheckResult h34 = check_h34(model.sigma());

  AssumptionReport rep;
  const std::pair<const char*, CheckResult> parts[] = {
      {"H3.2", f32.get()}, {"H3.3", f33.get()}, {"H3.4", h34}, {"H3.6", f36.get()}, {"H3.7", f37.get()}};
  for (const auto& [name, cr] : parts) {
    rep.verdicts[name] = cr.verdict;
    if (!cr.note.empty()) rep.notes[name] = cr.note;
    for (const auto& [k, v] : cr.constants) rep.bound_constants[k] = v;
  }
  rep.verdicts["H3.5"] = rep.verdicts["H3.3"];
  rep.verdicts["H3.1"] = Verdict::Pass;
  rep.notes["H3.1"] = "all coefficient kinds are smooth to third order";
  rep.phi = rep.bound_constants["Phi"];
  rep.h37_ratios = std::move(pts);
  return rep;
}

}  // namespace tdvarma
