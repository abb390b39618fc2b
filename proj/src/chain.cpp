#include "eqpert/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace eqpert {

namespace {

void check_state(const ChainState& s) {
  if (s.p.size() != s.r.size() || s.p.size() < 2)
    throw std::invalid_argument("chain state: need matching p, r with at least two sites");
}

}  // namespace

double hamiltonian(const ChainState& s, const Potential& pot) {
  long double h = 0.0L;
  for (double v : s.p) h += 0.5L * v * v;
  for (double v : s.r) h += pot.V(v);
  return static_cast<double>(h);
}

double sum_p(const ChainState& s) {
  long double t = 0.0L;
  for (double v : s.p) t += v;
  return static_cast<double>(t);
}

double sum_r(const ChainState& s) {
  long double t = 0.0L;
  for (double v : s.r) t += v;
  return static_cast<double>(t);
}

double micro_step_policy(double beta, double gamma) {
  double bg = beta * gamma;
  if (bg <= 0.0) return 0.1;
  return std::min(0.1, 0.1 / bg);
}

double gamma_window_midpoint(double n_sites, double alpha, double kappa) {
  if (!(n_sites > 1.0) || !(alpha > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("gamma_window_midpoint: bad arguments");
  return std::pow(n_sites, 2.0 * (kappa + alpha));
}

void integrate(ChainState& s, const Potential& pot, double beta, double gamma,
               double t_micro, RngStream& rng, const IntegrateOptions& opt) {
  check_state(s);
  if (!(beta > 0.0) || gamma < 0.0 || !(t_micro >= 0.0) || !std::isfinite(t_micro))
    throw std::invalid_argument("chain integrate: bad parameters");
  if (t_micro == 0.0) return;
  const int n = static_cast<int>(s.p.size());
  double dt = opt.dt_micro > 0.0 ? opt.dt_micro : micro_step_policy(beta, gamma);
  const long steps = std::max(1L, static_cast<long>(std::ceil(t_micro / dt)));
  dt = t_micro / static_cast<double>(steps);

  std::vector<double> f(n), g(n);
  auto force = [&] {
    for (int x = 0; x < n; ++x) f[x] = pot.dV(s.r[x]);
  };
  // explicit step of the stretch noise part over time h, substepped so the
  // update stays inside its stability region: the drift is an explicit Euler
  // step of dr = (beta gamma / 2) Lap V'(r) dt, stable only while
  // h_sub * beta * gamma * max V''(r) <= 1, and steep potentials push V'' far
  // above its equilibrium scale during tail excursions
  auto noise = [&](double h) {
    if (gamma == 0.0) return;
    while (h > 0.0) {
      double curv = 0.0;
      for (int x = 0; x < n; ++x) curv = std::max(curv, std::abs(pot.d2V(s.r[x])));
      if (!std::isfinite(curv))
        throw std::runtime_error("chain integrate: state exceeded guard bound (unstable step?)");
      double hs = curv > 0.0 ? std::min(h, 0.5 / (beta * gamma * curv)) : h;
      force();
      for (int x = 0; x < n; ++x) g[x] = rng.gaussian();
      double drift = 0.5 * beta * gamma * hs;
      double diff = std::sqrt(gamma * hs);
      for (int x = 0; x < n; ++x) {
        int xm = x == 0 ? n - 1 : x - 1;
        int xp = x + 1 == n ? 0 : x + 1;
        s.r[x] += drift * (f[xp] + f[xm] - 2.0 * f[x]) + diff * (g[xm] - g[x]);
      }
      h -= hs;
    }
  };
  auto kick = [&](double h) {
    force();
    for (int x = 0; x < n; ++x) {
      int xp = x + 1 == n ? 0 : x + 1;
      s.p[x] += h * (f[xp] - f[x]);
    }
  };
  auto drift_r = [&](double h) {
    for (int x = n - 1; x >= 0; --x) {
      int xm = x == 0 ? n - 1 : x - 1;
      s.r[x] += h * (s.p[x] - s.p[xm]);
    }
  };
  auto guard = [&] {
    for (int x = 0; x < n; ++x)
      if (!(std::abs(s.p[x]) <= opt.guard) || !(std::abs(s.r[x]) <= opt.guard))
        throw std::runtime_error("chain integrate: state exceeded guard bound (unstable step?)");
  };

  // adjacent half noise maps of consecutive Strang steps are merged
  noise(0.5 * dt);
  for (long k = 0; k < steps; ++k) {
    kick(0.5 * dt);
    drift_r(dt);
    kick(0.5 * dt);
    noise(k + 1 == steps ? 0.5 * dt : dt);
    if ((k & 63) == 0) guard();
  }
  guard();
  s.clock += t_micro;
}

ChainState sample_gibbs(const Thermodynamics& th, const GibbsTable& tab, double pbar,
                        int sites, RngStream& rng) {
  if (sites < 2) throw std::invalid_argument("sample_gibbs: need at least two sites");
  ChainState s;
  s.p.resize(sites);
  s.r.resize(sites);
  double sd = 1.0 / std::sqrt(th.beta());
  for (int x = 0; x < sites; ++x) s.p[x] = pbar + sd * rng.gaussian();
  for (int x = 0; x < sites; ++x) s.r[x] = th.sample_table(tab, rng);
  return s;
}

PerturbedProfile build_perturbed_profile(const Thermodynamics& th, double p_star,
                                         double r_star, double alpha,
                                         const Profile& sigma_minus,
                                         const Profile& sigma_plus, int sites) {
  if (sites < 2) throw std::invalid_argument("perturbed profile: need at least two sites");
  if (!(alpha > 0.0)) throw std::invalid_argument("perturbed profile: alpha must be positive");
  if (std::abs(sigma_minus.mean()) > 1e-12 || std::abs(sigma_plus.mean()) > 1e-12)
    throw std::invalid_argument("perturbed profile: perturbations must be zero-mean");
  PerturbedProfile prof;
  prof.sites = sites;
  prof.p_star = p_star;
  prof.r_star = r_star;
  prof.alpha = alpha;
  prof.scale = std::pow(static_cast<double>(sites), -alpha);
  prof.tau_prime_star = th.tension_full(r_star).d1;
  double root = std::sqrt(prof.tau_prime_star);
  prof.pbar.resize(sites);
  prof.rbar.resize(sites);
  prof.tau.resize(sites);
  prof.mode.resize(sites);
  for (int x = 0; x < sites; ++x) {
    double u = static_cast<double>(x) / sites;
    double sm = sigma_minus.value(u);
    double sp = sigma_plus.value(u);
    prof.pbar[x] = p_star + prof.scale * root * (sp - sm);
    prof.rbar[x] = r_star + prof.scale * (sm + sp);
    prof.tau[x] = th.tension(prof.rbar[x]);
    prof.mode[x] = th.mode(prof.tau[x]);
  }
  return prof;
}

ChainState sample_perturbed(const Thermodynamics& th, const PerturbedProfile& prof,
                            RngStream& rng) {
  ChainState s;
  s.p.resize(prof.sites);
  s.r.resize(prof.sites);
  double sd = 1.0 / std::sqrt(th.beta());
  for (int x = 0; x < prof.sites; ++x) {
    s.p[x] = prof.pbar[x] + sd * rng.gaussian();
    s.r[x] = th.sample_rejection_at_mode(prof.tau[x], prof.mode[x], rng);
  }
  return s;
}

}  // namespace eqpert
