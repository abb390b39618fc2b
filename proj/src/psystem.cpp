#include "eqpert/psystem.hpp"

#include <cmath>
#include <stdexcept>

namespace eqpert {

TwoSystem linearize_psystem(double tau_prime, double tau_second) {
  if (!(tau_prime > 0.0)) throw std::domain_error("linearize_psystem: need tau' > 0");
  TwoSystem sys;
  sys.tau_prime = tau_prime;
  sys.tau_second = tau_second;
  double root = std::sqrt(tau_prime);
  sys.a = {{{0.0, -tau_prime}, {-1.0, 0.0}}};
  sys.lambda = {root, -root};
  sys.right = {{{-root, 1.0}, {root, 1.0}}};
  sys.left = {{{-0.5 / root, 0.5}, {0.5 / root, 0.5}}};
  sys.hvec = {-tau_second, 0.0};
  sys.burgers = {tau_second / (4.0 * root), -tau_second / (4.0 * root)};
  // c_1 = -(lambda_1 - lambda_2)^{-1} l_1' H, c_2 = +(lambda_1 - lambda_2)^{-1} l_2' H
  double gap = sys.lambda[0] - sys.lambda[1];
  sys.cross = {-dot2(sys.left[0], sys.hvec) / gap, dot2(sys.left[1], sys.hvec) / gap};
  return sys;
}

double dot2(const std::array<double, 2>& x, const std::array<double, 2>& y) {
  return x[0] * y[0] + x[1] * y[1];
}

ScalarField field_from_profile(const Profile& f) {
  ScalarField out;
  out.value = [f](double u) { return f.value(u); };
  out.du = [f](double u) { return f.deriv(u); };
  out.prim = [f](double u) { return f.primitive(u); };
  return out;
}

ScalarField field_from_wave(const Wave& w, double s) {
  ScalarField out;
  out.value = [w, s](double u) { return w.value(s, u); };
  out.du = [w, s](double u) { return w.point(s, u).du; };
  out.prim = [w, s](double u) { return w.primitive(s, u); };
  return out;
}

double pair_correction(const TwoSystem& sys, const ScalarField& s1, const ScalarField& s2,
                       int k, int j, int jp, double u, double up) {
  if (k < 1 || k > 2 || j < 1 || j > 2 || jp < 1 || jp > 2 || j == jp)
    throw std::invalid_argument("pair_correction: indices must be 1 or 2 with j != jp");
  if (k == 1 && j == 1) return sys.cross[0] * s1.value(u) * s2.value(up);
  if (k == 1 && j == 2) return sys.cross[0] * s2.prim(u) * s1.du(up);
  if (k == 2 && j == 1) return sys.cross[1] * s1.prim(u) * s2.du(up);
  return sys.cross[1] * s2.value(u) * s1.value(up);
}

double correction_total(const TwoSystem& sys, const ScalarField& s1, const ScalarField& s2,
                        int k, double u1, double u2) {
  if (k < 1 || k > 2) throw std::invalid_argument("correction_total: k must be 1 or 2");
  // self term of the other family: l_k' H sigma_j^2 / (2 (lambda_j - lambda_k))
  int other = k == 1 ? 2 : 1;
  double lkh = dot2(sys.left[k - 1], sys.hvec);
  double uo = other == 1 ? u1 : u2;
  double so = other == 1 ? s1.value(uo) : s2.value(uo);
  double self = lkh * so * so / (2.0 * (sys.lambda[other - 1] - sys.lambda[k - 1]));
  return self + pair_correction(sys, s1, s2, k, 1, 2, u1, u2) +
         pair_correction(sys, s1, s2, k, 2, 1, u2, u1);
}

double correction_identity_residual(const TwoSystem& sys, const ScalarField& s1,
                                    const ScalarField& s2, int grid) {
  if (grid < 2) throw std::invalid_argument("correction_identity_residual: grid too small");
  // small enough that the bump shape's large fifth derivative cannot push the
  // fourth-order truncation error past the 1e-8 budget
  const double h = 1e-4;
  auto d4 = [&](const std::function<double(double)>& f, double x) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  };
  const std::function<double(double)>* sval[2] = {&s1.value, &s2.value};
  const std::function<double(double)>* sdu[2] = {&s1.du, &s2.du};
  double worst = 0.0;
  for (int k = 1; k <= 2; ++k) {
    double lkh = dot2(sys.left[k - 1], sys.hvec);
    for (int j = 1; j <= 2; ++j) {
      int jp = 3 - j;
      double cu = sys.lambda[j - 1] - sys.lambda[k - 1];
      double cup = sys.lambda[jp - 1] - sys.lambda[k - 1];
      for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
          double u = (a + 0.5) / grid;
          double up = (b + 0.5) / grid;
          double lhs =
              cu * d4([&](double x) { return pair_correction(sys, s1, s2, k, j, jp, x, up); },
                      u) +
              cup * d4([&](double x) { return pair_correction(sys, s1, s2, k, j, jp, u, x); },
                       up);
          double rhs = lkh * (*sval[j - 1])(u) * (*sdu[jp - 1])(up);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
    }
  }
  return worst;
}

ChainMacro make_chain_macro(double p_star, double r_star, double tau_prime,
                            double tau_second, const Profile& sigma_minus,
                            const Profile& sigma_plus) {
  if (std::abs(sigma_minus.mean()) > 1e-12 || std::abs(sigma_plus.mean()) > 1e-12)
    throw std::invalid_argument("chain macro: perturbations must be zero-mean");
  ChainMacro mac;
  mac.sys = linearize_psystem(tau_prime, tau_second);
  mac.minus = Wave(sigma_minus, mac.sys.burgers[0]);
  mac.plus = Wave(sigma_plus, mac.sys.burgers[1]);
  mac.p_star = p_star;
  mac.r_star = r_star;
  return mac;
}

CorrectionPoint chain_correction_point(const ChainMacro& mac, int family, double s,
                                       double u1, double u2) {
  if (family < 0 || family > 1)
    throw std::invalid_argument("chain_correction_point: family is 0 (minus) or 1 (plus)");
  double tp = mac.sys.tau_prime, ts = mac.sys.tau_second;
  double q8 = -ts / (8.0 * tp);
  double c4 = -ts / (4.0 * tp);
  WavePoint m = mac.minus.point(s, u1);
  WavePoint p = mac.plus.point(s, u2);
  CorrectionPoint out;
  if (family == 0) {
    double prim_p = mac.plus.primitive(s, u2);
    double prim_p_ds = mac.plus.primitive_ds(s, u2);
    out.value = q8 * p.value * p.value + c4 * (m.du * prim_p + m.value * p.value);
    out.du1 = c4 * (m.dudu * prim_p + m.du * p.value);
    out.du2 = q8 * 2.0 * p.value * p.du + c4 * (m.du * p.value + m.value * p.du);
    out.ds = q8 * 2.0 * p.value * p.ds +
             c4 * (m.dsdu * prim_p + m.du * prim_p_ds + m.ds * p.value + m.value * p.ds);
  } else {
    double prim_m = mac.minus.primitive(s, u1);
    double prim_m_ds = mac.minus.primitive_ds(s, u1);
    out.value = q8 * m.value * m.value + c4 * (m.value * p.value + prim_m * p.du);
    out.du1 = q8 * 2.0 * m.value * m.du + c4 * (m.du * p.value + m.value * p.du);
    out.du2 = c4 * (m.value * p.du + prim_m * p.dudu);
    out.ds = q8 * 2.0 * m.value * m.ds +
             c4 * (m.ds * p.value + m.value * p.ds + prim_m_ds * p.du + prim_m * p.dsdu);
  }
  return out;
}

std::array<double, 2> chain_bracket(const ChainMacro& mac, double s, double u1, double u2) {
  double root = std::sqrt(mac.sys.tau_prime);
  WavePoint m = mac.minus.point(s, u1);
  WavePoint p = mac.plus.point(s, u2);
  CorrectionPoint cm = chain_correction_point(mac, 0, s, u1, u2);
  CorrectionPoint cp = chain_correction_point(mac, 1, s, u1, u2);
  double bm = -m.ds - 2.0 * root * cm.du2;
  double bp = -p.ds + 2.0 * root * cp.du1;
  double quad = (m.value + p.value) * (m.du + p.du);  // (1/2) d_u (sigma_- + sigma_+)^2
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i)
    out[i] = bm * mac.sys.right[0][i] + bp * mac.sys.right[1][i] +
             quad * (i == 0 ? mac.sys.tau_second : 0.0);
  return out;
}

namespace {

struct MacroPoint {
  double s, u1, u2, scale1, scale2;
};

MacroPoint macro_point(const ChainMacro& mac, double n_sites, double alpha, double kappa,
                       double t, double u) {
  if (!(n_sites > 1.0)) throw std::invalid_argument("chain profile: need N > 1");
  MacroPoint mp;
  mp.s = std::pow(n_sites, kappa - alpha) * t;
  double delta = std::pow(n_sites, kappa) * std::sqrt(mac.sys.tau_prime) * t;
  mp.u1 = u - delta;
  mp.u2 = u + delta;
  mp.scale1 = std::pow(n_sites, -alpha);
  mp.scale2 = mp.scale1 * mp.scale1;
  return mp;
}

}  // namespace

std::array<double, 2> chain_profile(const ChainMacro& mac, double n_sites, double alpha,
                                    double kappa, double t, double u) {
  MacroPoint mp = macro_point(mac, n_sites, alpha, kappa, t, u);
  double sm = mac.minus.value(mp.s, mp.u1);
  double sp = mac.plus.value(mp.s, mp.u2);
  double tm = chain_correction_point(mac, 0, mp.s, mp.u1, mp.u2).value;
  double tp = chain_correction_point(mac, 1, mp.s, mp.u1, mp.u2).value;
  std::array<double, 2> base{mac.p_star, mac.r_star};
  for (int i = 0; i < 2; ++i)
    base[i] += (mp.scale1 * sm + mp.scale2 * tm) * mac.sys.right[0][i] +
               (mp.scale1 * sp + mp.scale2 * tp) * mac.sys.right[1][i];
  return base;
}

std::array<double, 2> chain_profile_dt(const ChainMacro& mac, double n_sites, double alpha,
                                       double kappa, double t, double u) {
  MacroPoint mp = macro_point(mac, n_sites, alpha, kappa, t, u);
  double s_dt = std::pow(n_sites, kappa - alpha);
  double shift_dt = std::pow(n_sites, kappa) * std::sqrt(mac.sys.tau_prime);
  WavePoint m = mac.minus.point(mp.s, mp.u1);
  WavePoint p = mac.plus.point(mp.s, mp.u2);
  CorrectionPoint cm = chain_correction_point(mac, 0, mp.s, mp.u1, mp.u2);
  CorrectionPoint cp = chain_correction_point(mac, 1, mp.s, mp.u1, mp.u2);
  double dsm = m.ds * s_dt - m.du * shift_dt;
  double dsp = p.ds * s_dt + p.du * shift_dt;
  double dtm = cm.ds * s_dt - cm.du1 * shift_dt + cm.du2 * shift_dt;
  double dtp = cp.ds * s_dt - cp.du1 * shift_dt + cp.du2 * shift_dt;
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i)
    out[i] = (mp.scale1 * dsm + mp.scale2 * dtm) * mac.sys.right[0][i] +
             (mp.scale1 * dsp + mp.scale2 * dtp) * mac.sys.right[1][i];
  return out;
}

std::vector<std::array<double, 2>> epsilon_lattice(
    const ChainMacro& mac, const std::function<double(double)>& tension, int n_sites,
    double alpha, double kappa, double t) {
  if (n_sites < 2) throw std::invalid_argument("epsilon_lattice: need at least two sites");
  std::vector<std::array<double, 2>> prof(n_sites);
  std::vector<double> taus(n_sites);
  for (int x = 0; x < n_sites; ++x) {
    prof[x] = chain_profile(mac, n_sites, alpha, kappa, t, static_cast<double>(x) / n_sites);
    taus[x] = tension(prof[x][1]);
  }
  double speed = std::pow(static_cast<double>(n_sites), 1.0 + kappa);
  std::vector<std::array<double, 2>> eps(n_sites);
  for (int x = 0; x < n_sites; ++x) {
    int xp = x + 1 == n_sites ? 0 : x + 1;
    int xm = x == 0 ? n_sites - 1 : x - 1;
    auto ddt = chain_profile_dt(mac, n_sites, alpha, kappa, t, static_cast<double>(x) / n_sites);
    eps[x][0] = speed * (taus[xp] - taus[x]) - ddt[0];
    eps[x][1] = speed * (prof[x][0] - prof[xm][0]) - ddt[1];
  }
  return eps;
}

}  // namespace eqpert
