#include "smilecal/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smilecal/error.hpp"

namespace smilecal {

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::hagan: return "hagan";
    case ModelKind::mm: return "mm";
    case ModelKind::rebonato: return "rebonato";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "hagan") return ModelKind::hagan;
  if (name == "mm" || name == "mercurio-morini") return ModelKind::mm;
  if (name == "rebonato") return ModelKind::rebonato;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected hagan, mm or rebonato)");
}

double corr_rho(double ti, double tj, const CorrelationParams& p) {
  return p.eta1 + (1.0 - p.eta1) * std::exp(-p.lambda1 * std::abs(ti - tj));
}

double corr_theta(double ti, double tj, const CorrelationParams& p) {
  return p.eta2 + (1.0 - p.eta2) * std::exp(-p.lambda2 * std::abs(ti - tj));
}

double corr_phi(double ti, double tj, double phi_ii, double phi_jj, const CorrelationParams& p) {
  const double sign = phi_ii < 0.0 ? -1.0 : 1.0;
  const double decay = -p.lambda3 * std::max(ti - tj, 0.0) - p.lambda3 * std::max(tj - ti, 0.0);
  return sign * std::sqrt(std::abs(phi_ii * phi_jj)) * std::exp(decay);
}

ModelKind kind_of(const ModelParams& model) { return static_cast<ModelKind>(model.index()); }

std::size_t forward_count(const ModelParams& model) {
  return std::visit([](const auto& m) { return m.phi.size(); }, model);
}

double beta_of(const ModelParams& model) {
  return std::visit([](const auto& m) { return m.beta; }, model);
}

const CorrelationParams& correlation_of(const ModelParams& model) {
  return std::visit([](const auto& m) -> const CorrelationParams& { return m.corr; }, model);
}

void set_correlation(ModelParams& model, const CorrelationParams& corr) {
  std::visit([&](auto& m) { m.corr = corr; }, model);
}

namespace {

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DomainError(std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                      std::to_string(want));
  }
}

void check_phis(const std::vector<double>& phi) {
  for (double p : phi) {
    if (!(std::abs(p) <= 1.0)) throw DomainError("correlation phi outside [-1,1]");
  }
}

void check_positive(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
  }
}

}  // namespace

void validate(const ModelParams& model, std::size_t forwards) {
  if (forwards == 0) throw DomainError("model needs at least one forward");
  const double beta = beta_of(model);
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0,1]");
  const auto& c = correlation_of(model);
  for (double eta : {c.eta1, c.eta2}) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0,1]");
  }
  for (double lambda : {c.lambda1, c.lambda2, c.lambda3}) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and non-negative");
  }
  if (const auto* m = std::get_if<HaganParams>(&model)) {
    check_size(m->phi.size(), forwards, "phi");
    check_size(m->nu.size(), forwards, "nu");
    check_size(m->alpha.size(), forwards, "alpha");
    check_phis(m->phi);
    check_positive(m->alpha, "alpha");
    for (double v : m->nu) {
      if (!(v >= 0.0)) throw DomainError("vol-of-vol must be non-negative");
    }
  } else if (const auto* m = std::get_if<MMParams>(&model)) {
    check_size(m->phi.size(), forwards, "phi");
    check_size(m->alpha.size(), forwards, "alpha");
    check_phis(m->phi);
    check_positive(m->alpha, "alpha");
    if (!(m->nu >= 0.0)) throw DomainError("vol-of-vol must be non-negative");
  } else {
    const auto& r = std::get<RebonatoParams>(model);
    check_size(r.phi.size(), forwards, "phi");
    check_size(r.kappa.size(), forwards, "kappa");
    check_phis(r.phi);
    check_positive(r.kappa, "kappa");
  }
}

SabrSlice effective_slice(const ModelParams& model, const TenorStructure& tenor, std::size_t i) {
  SabrSlice s;
  s.beta = beta_of(model);
  s.f0 = tenor.forwards.at(i);
  s.expiry = tenor.reset_time(i);
  if (const auto* m = std::get_if<HaganParams>(&model)) {
    s.alpha = m->alpha.at(i);
    s.phi = m->phi.at(i);
    s.nu = m->nu.at(i);
  } else if (const auto* m = std::get_if<MMParams>(&model)) {
    s.alpha = mm_effective_alpha(i, m->alpha, m->phi, m->nu, m->beta, tenor);
    s.phi = m->phi.at(i);
    s.nu = m->nu;
  } else {
    const auto& r = std::get<RebonatoParams>(model);
    const auto eff = rebonato_effective_params(r.kappa.at(i), r.g, r.h, s.expiry);
    s.alpha = eff.alpha;
    s.nu = eff.nu;
    s.phi = r.phi.at(i);
  }
  return s;
}

MarketState initial_state(const ModelParams& model, const TenorStructure& tenor) {
  MarketState state;
  state.forwards = tenor.forwards;
  if (const auto* m = std::get_if<HaganParams>(&model)) {
    state.vols = m->alpha;
  } else if (std::holds_alternative<MMParams>(model)) {
    state.vols = {1.0};
  } else {
    state.vols = std::get<RebonatoParams>(model).kappa;
  }
  return state;
}

std::size_t first_unfixed_index(double t, const TenorStructure& tenor) {
  const std::size_t m = tenor.size();
  const auto begin = tenor.times.begin();
  const auto it = std::upper_bound(begin, begin + static_cast<std::ptrdiff_t>(m), t);
  const auto j = static_cast<std::size_t>(it - begin);
  if (j >= m) throw DomainError("time is at or beyond the last reset date");
  return j;
}

std::size_t driver_count(const ModelParams& model) {
  const std::size_t m = forward_count(model);
  return std::holds_alternative<MMParams>(model) ? m + 1 : 2 * m;
}

Eigen::MatrixXd assemble_correlation(const ModelParams& model, const TenorStructure& tenor) {
  const std::size_t m = forward_count(model);
  const auto& c = correlation_of(model);
  const auto& t = tenor.times;
  const auto n = static_cast<Eigen::Index>(driver_count(model));
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  const auto mi = static_cast<Eigen::Index>(m);
  for (Eigen::Index i = 0; i < mi; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      p(i, j) = p(j, i) = corr_rho(t[i], t[j], c);
    }
  }
  if (const auto* mm = std::get_if<MMParams>(&model)) {
    for (Eigen::Index i = 0; i < mi; ++i) p(i, mi) = p(mi, i) = mm->phi[i];
    return p;
  }
  const auto& phi = std::holds_alternative<HaganParams>(model) ? std::get<HaganParams>(model).phi
                                                                : std::get<RebonatoParams>(model).phi;
  for (Eigen::Index i = 0; i < mi; ++i) {
    for (Eigen::Index j = 0; j < mi; ++j) {
      p(i, mi + j) = p(mi + j, i) = corr_phi(t[i], t[j], phi[i], phi[j], c);
      if (j < i) p(mi + i, mi + j) = p(mi + j, mi + i) = corr_theta(t[i], t[j], c);
    }
  }
  return p;
}

CorrelationFactor factorize_correlation(const Eigen::MatrixXd& p) {
  if (p.rows() != p.cols()) throw DomainError("correlation matrix must be square");
  if (!p.allFinite()) throw DomainError("correlation matrix has non-finite entries");
  CorrelationFactor out;
  out.matrix = p;
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() == Eigen::Success) {
    out.lower = llt.matrixL();
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
  if (eig.info() != Eigen::Success) throw DomainError("eigen-decomposition of correlation matrix failed");
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd scale = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = scale.asDiagonal() * repaired * scale.asDiagonal();
  repaired = 0.5 * (repaired + repaired.transpose());
  repaired.diagonal().setOnes();

  Eigen::LLT<Eigen::MatrixXd> again(repaired);
  if (again.info() != Eigen::Success) throw DomainError("correlation matrix could not be repaired");
  out.lower = again.matrixL();
  out.matrix = repaired;
  out.repaired = true;
  return out;
}

Dynamics::Dynamics(const ModelParams& model, const TenorStructure& tenor, std::size_t active)
    : kind_(kind_of(model)), active_(active), beta_(beta_of(model)) {
  if (active == 0 || active > tenor.size() || active > forward_count(model)) {
    throw DomainError("active forward count out of range");
  }
  tau_.assign(tenor.accruals.begin(), tenor.accruals.begin() + static_cast<std::ptrdiff_t>(active));
  maturity_.assign(tenor.times.begin(), tenor.times.begin() + static_cast<std::ptrdiff_t>(active));
  const auto& c = correlation_of(model);
  rho_.resize(active * active);
  for (std::size_t i = 0; i < active; ++i) {
    for (std::size_t j = 0; j < active; ++j) rho_[i * active + j] = i == j ? 1.0 : corr_rho(maturity_[i], maturity_[j], c);
  }
  const std::vector<double>* phi = nullptr;
  if (const auto* m = std::get_if<HaganParams>(&model)) {
    phi = &m->phi;
    nu_.assign(m->nu.begin(), m->nu.begin() + static_cast<std::ptrdiff_t>(active));
  } else if (const auto* m = std::get_if<MMParams>(&model)) {
    alpha_.assign(m->alpha.begin(), m->alpha.begin() + static_cast<std::ptrdiff_t>(active));
    common_nu_ = m->nu;
  } else {
    const auto& r = std::get<RebonatoParams>(model);
    phi = &r.phi;
    g_ = r.g;
    h_ = r.h;
  }
  if (phi) {
    phi_.resize(active * active);
    for (std::size_t i = 0; i < active; ++i) {
      for (std::size_t j = 0; j < active; ++j) {
        phi_[i * active + j] = corr_phi(maturity_[i], maturity_[j], (*phi)[i], (*phi)[j], c);
      }
    }
  }
}

std::vector<std::size_t> Dynamics::driver_indices(std::size_t forwards) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < active_; ++i) idx.push_back(i);
  if (kind_ == ModelKind::mm) {
    idx.push_back(forwards);
  } else {
    for (std::size_t i = 0; i < active_; ++i) idx.push_back(forwards + i);
  }
  return idx;
}

double Dynamics::cev(double f) const {
  const double x = std::max(f, 0.0);
  if (beta_ == 0.5) return std::sqrt(x);
  if (beta_ == 1.0) return x;
  if (beta_ == 0.0) return 1.0;
  return std::pow(x, beta_);
}

double Dynamics::vol_level(std::size_t j, double t, const double* v) const {
  switch (kind_) {
    case ModelKind::hagan: return v[j];
    case ModelKind::mm: return alpha_[j] * v[0];
    case ModelKind::rebonato: return v[j] * g_(maturity_[j] - t);
  }
  return 0.0;
}

void Dynamics::drifts(double t, std::size_t first, const double* f, const double* v, double* mu_f,
                      double* mu_v) const {
  const std::size_t n = active_;
  // mu_f[j] first holds c_j = tau_j V_j F_j^beta / (1 + tau_j F_j). Going down in i,
  // the sums for i only read c_j with j <= i, so mu_f[i] can be overwritten in place.
  for (std::size_t j = first; j < n; ++j) {
    const double fj = f[j];
    mu_f[j] = tau_[j] * vol_level(j, t, v) * cev(fj) / (1.0 + tau_[j] * fj);
  }
  for (std::size_t i = n; i-- > first;) {
    double sum_rho = 0.0;
    double sum_phi = 0.0;
    for (std::size_t j = first; j <= i; ++j) {
      sum_rho += rho_[i * n + j] * mu_f[j];
      if (!phi_.empty()) sum_phi += phi_[i * n + j] * mu_f[j];
    }
    if (kind_ == ModelKind::hagan) {
      mu_v[i] = nu_[i] * v[i] * sum_phi;
    } else if (kind_ == ModelKind::rebonato) {
      mu_v[i] = v[i] * h_(maturity_[i] - t) * sum_phi;
    }
    mu_f[i] = vol_level(i, t, v) * cev(f[i]) * sum_rho;
  }
}

void Dynamics::step(double t, double dt, std::size_t first, double* f, double* v, const double* z,
                    double* scratch) const {
  const std::size_t n = active_;
  double* mu_f = scratch;
  double* mu_v = scratch + n;
  drifts(t, first, f, v, mu_f, mu_v);
  const double sq = std::sqrt(dt);

  // Forwards first: their diffusion reads the volatilities at the start of the step.
  for (std::size_t i = first; i < n; ++i) {
    const double level = vol_level(i, t, v);
    const double fi = f[i];
    f[i] = fi + mu_f[i] * dt + level * cev(fi) * sq * z[i];
  }
  switch (kind_) {
    case ModelKind::hagan:
      for (std::size_t i = first; i < n; ++i) {
        const double drift = v[i] > 0.0 ? mu_v[i] / v[i] : 0.0;
        v[i] *= std::exp((drift - 0.5 * nu_[i] * nu_[i]) * dt + nu_[i] * sq * z[n + i]);
      }
      break;
    case ModelKind::mm:
      v[0] *= std::exp(-0.5 * common_nu_ * common_nu_ * dt + common_nu_ * sq * z[n]);
      break;
    case ModelKind::rebonato:
      for (std::size_t i = first; i < n; ++i) {
        const double hv = h_(maturity_[i] - t);
        const double drift = v[i] > 0.0 ? mu_v[i] / v[i] : 0.0;
        v[i] *= std::exp((drift - 0.5 * hv * hv) * dt + hv * sq * z[n + i]);
      }
      break;
  }
  for (std::size_t i = first; i < n; ++i) {
    if (!std::isfinite(f[i])) throw SimulationError("non-finite forward rate in simulation");
  }
  for (std::size_t i = 0; i < vol_count(); ++i) {
    if (!std::isfinite(v[i])) throw SimulationError("non-finite volatility in simulation");
  }
}

Drifts drifts(const MarketState& state, const ModelParams& model, const TenorStructure& tenor) {
  const Dynamics dyn(model, tenor, forward_count(model));
  const std::size_t first = first_unfixed_index(state.t, tenor);
  Drifts out;
  out.forward.assign(dyn.active(), 0.0);
  if (dyn.kind() != ModelKind::mm) out.vol.assign(dyn.active(), 0.0);
  dyn.drifts(state.t, first, state.forwards.data(), state.vols.data(), out.forward.data(),
             out.vol.empty() ? nullptr : out.vol.data());
  return out;
}

MarketState simulate_step(const MarketState& state, const ModelParams& model, const TenorStructure& tenor, double dt,
                          std::span<const double> z) {
  const Dynamics dyn(model, tenor, forward_count(model));
  if (z.size() != dyn.drivers()) throw DomainError("normal vector has the wrong dimension");
  if (state.forwards.size() != dyn.active() || state.vols.size() != dyn.vol_count()) {
    throw DomainError("state does not match the model");
  }
  const std::size_t first = first_unfixed_index(state.t, tenor);
  MarketState next = state;
  std::vector<double> scratch(2 * dyn.active());
  dyn.step(state.t, dt, first, next.forwards.data(), next.vols.data(), z.data(), scratch.data());
  next.t = state.t + dt;
  return next;
}

}  // namespace smilecal
