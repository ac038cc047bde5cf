#include "rhem/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "rhem/rng.hpp"

namespace rhem {

std::string tie_method_name(TieMethod t) {
  return t == TieMethod::Efron ? "efron" : "breslow";
}

TieMethod tie_method_from_name(const std::string& name) {
  if (name == "efron") return TieMethod::Efron;
  if (name == "breslow") return TieMethod::Breslow;
  fail(ErrorCode::ConfigInvalid, "unknown tie method: " + name);
}

void FitConfig::validate() const {
  if (max_iterations < 1)
    fail(ErrorCode::ConfigInvalid, "maxIterations must be at least 1");
  if (!(rel_tolerance > 0))
    fail(ErrorCode::ConfigInvalid, "relTolerance must be positive");
  if (ridge < 0) fail(ErrorCode::ConfigInvalid, "ridge must be non-negative");
}

std::vector<StratumGroup> group_strata(const ParsedInstances& data) {
  std::vector<StratumGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::uint32_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    auto [it, inserted] = index.try_emplace(row.stratum, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().stratum = row.stratum;
    }
    auto& g = groups[it->second];
    g.pool.push_back(r);
    if (row.is_case) g.cases.push_back(r);
  }
  for (auto& g : groups) {
    if (g.cases.empty())
      fail(ErrorCode::NoCaseInStratum,
           "stratum " + g.stratum + " contains no case row");
    g.informative = g.pool.size() > g.cases.size();
  }
  return groups;
}

namespace {

struct Prepared {
  Eigen::MatrixXd X;  // n_instances x p
  std::vector<StratumGroup> groups;
  std::vector<std::string> names;
  std::uint64_t n_events = 0;
  std::uint64_t n_instances = 0;
  Eigen::Index p = 0;
};

Prepared prepare(const ParsedInstances& data) {
  Prepared prep;
  prep.names = data.covariate_names;
  prep.p = Eigen::Index(data.covariate_names.size());
  prep.n_instances = data.rows.size();
  prep.X.resize(Eigen::Index(data.rows.size()), prep.p);
  std::unordered_set<std::uint32_t> events;
  for (Eigen::Index r = 0; r < prep.X.rows(); ++r) {
    const auto& row = data.rows[std::size_t(r)];
    if (Eigen::Index(row.x.size()) != prep.p)
      fail(ErrorCode::MalformedRecord,
           "instance row has " + std::to_string(row.x.size()) +
               " covariates, expected " + std::to_string(prep.p));
    for (Eigen::Index c = 0; c < prep.p; ++c) prep.X(r, c) = row.x[std::size_t(c)];
    events.insert(row.event_index);
  }
  prep.n_events = events.size();
  prep.groups = group_strata(data);
  return prep;
}

Prepared restrict_columns(const Prepared& prep, std::span<const Eigen::Index> cols) {
  Prepared out;
  out.groups = prep.groups;
  out.n_events = prep.n_events;
  out.n_instances = prep.n_instances;
  out.p = Eigen::Index(cols.size());
  out.X.resize(prep.X.rows(), out.p);
  out.names.reserve(cols.size());
  for (Eigen::Index c = 0; c < out.p; ++c) {
    out.X.col(c) = prep.X.col(cols[std::size_t(c)]);
    out.names.push_back(prep.names[std::size_t(cols[std::size_t(c)])]);
  }
  return out;
}

// Log partial likelihood with analytic score and Hessian. Each informative
// group contributes independently; `weights` scales group contributions
// (bootstrap multiplicities). `group_scores` receives per-group score vectors
// at the evaluation point when non-null (sandwich variance input).
struct EvalResult {
  double value = 0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

EvalResult evaluate(const Prepared& prep, const Eigen::VectorXd& beta,
                    TieMethod ties, std::span<const double> weights = {},
                    std::vector<Eigen::VectorXd>* group_scores = nullptr,
                    bool want_derivs = true) {
  const Eigen::Index p = prep.p;
  EvalResult out;
  out.grad = Eigen::VectorXd::Zero(p);
  out.hess = Eigen::MatrixXd::Zero(p, p);
  if (group_scores) group_scores->clear();

  Eigen::VectorXd eta = prep.X * beta;

  Eigen::VectorXd sum_x_pool(p), sum_x_case(p), w_r(p), g_grad(p);
  Eigen::MatrixXd sum_xx_pool(p, p), sum_xx_case(p, p);

  for (std::size_t gi = 0; gi < prep.groups.size(); ++gi) {
    const auto& g = prep.groups[gi];
    if (!g.informative) continue;
    const double w = weights.empty() ? 1.0 : weights[gi];
    if (w == 0.0) {
      if (group_scores) group_scores->push_back(Eigen::VectorXd::Zero(p));
      continue;
    }

    double m = -std::numeric_limits<double>::infinity();
    for (auto r : g.pool) m = std::max(m, eta[r]);

    double s_pool = 0, s_case = 0, case_eta = 0;
    sum_x_pool.setZero();
    sum_x_case.setZero();
    if (want_derivs) {
      sum_xx_pool.setZero();
      sum_xx_case.setZero();
    }
    for (auto r : g.pool) {
      const double e = std::exp(eta[r] - m);
      s_pool += e;
      sum_x_pool.noalias() += e * prep.X.row(r).transpose();
      if (want_derivs)
        sum_xx_pool.noalias() +=
            e * prep.X.row(r).transpose() * prep.X.row(r);
    }
    for (auto r : g.cases) {
      const double e = std::exp(eta[r] - m);
      s_case += e;
      case_eta += eta[r];
      sum_x_case.noalias() += e * prep.X.row(r).transpose();
      if (want_derivs)
        sum_xx_case.noalias() +=
            e * prep.X.row(r).transpose() * prep.X.row(r);
    }

    const double d = double(g.cases.size());
    double value = case_eta;
    g_grad.setZero();
    for (auto r : g.cases) g_grad += prep.X.row(r).transpose();
    for (std::size_t r = 0; r < g.cases.size(); ++r) {
      const double c = ties == TieMethod::Efron ? double(r) / d : 0.0;
      const double s_r = s_pool - c * s_case;
      if (!(s_r > 0))
        fail(ErrorCode::SingularHessian,
             "non-positive risk pool in likelihood evaluation");
      value -= m + std::log(s_r);
      w_r = (sum_x_pool - c * sum_x_case) / s_r;
      g_grad -= w_r;
      if (want_derivs)
        out.hess.noalias() -=
            w * ((sum_xx_pool - c * sum_xx_case) / s_r - w_r * w_r.transpose());
    }
    out.value += w * value;
    out.grad.noalias() += w * g_grad;
    if (group_scores) group_scores->push_back(g_grad);
  }
  if (!std::isfinite(out.value))
    fail(ErrorCode::SingularHessian, "log likelihood is not finite");
  return out;
}

struct NewtonOutcome {
  Eigen::VectorXd beta;
  EvalResult eval;  // at beta, unpenalized
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

NewtonOutcome newton(const Prepared& prep, const FitConfig& cfg,
                     const Eigen::VectorXd& start,
                     std::span<const double> weights = {}) {
  NewtonOutcome out;
  out.beta = start;
  out.eval = evaluate(prep, out.beta, cfg.ties, weights);
  double pen = out.eval.value - 0.5 * cfg.ridge * out.beta.squaredNorm();

  // Data with no information (all-zero or within-stratum-constant columns)
  // leave the gradient at zero up to accumulated rounding; the start point is
  // already the optimum then.
  double x_scale = 1.0;
  for (const auto& g : prep.groups)
    if (g.informative)
      for (auto r : g.pool) x_scale += prep.X.row(r).cwiseAbs().sum();
  if ((out.eval.grad - cfg.ridge * out.beta).lpNorm<Eigen::Infinity>() <=
      1e-12 * x_scale) {
    out.converged = true;
    return out;
  }

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    out.iterations = it;
    Eigen::MatrixXd info = -out.eval.hess;
    info.diagonal().array() += cfg.ridge;
    Eigen::VectorXd g_pen = out.eval.grad - cfg.ridge * out.beta;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd delta = ldlt.solve(g_pen);
    const double resid = (info * delta - g_pen).norm();
    if (!delta.allFinite() || resid > 1e-6 * (1.0 + g_pen.norm()))
      fail(ErrorCode::SingularHessian,
           "information matrix is singular (collinear covariates)");

    double alpha = 1.0;
    bool accepted = false;
    EvalResult next;
    Eigen::VectorXd beta_next;
    double pen_next = 0;
    for (int h = 0; h < 30; ++h) {
      beta_next = out.beta + alpha * delta;
      bool ok = true;
      try {
        next = evaluate(prep, beta_next, cfg.ties, weights);
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        pen_next = next.value - 0.5 * cfg.ridge * beta_next.squaredNorm();
        if (std::isfinite(pen_next) &&
            pen_next >= pen - 1e-12 * (std::abs(pen) + 1.0)) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      out.stalled = true;
      return out;
    }
    const double change = std::abs(pen_next - pen) / (std::abs(pen_next) + 1.0);
    out.beta = beta_next;
    out.eval = next;
    pen = pen_next;
    if (change < cfg.rel_tolerance) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

FitResult fit_prepared(const Prepared& prep, const FitConfig& cfg,
                       std::span<const double> weights = {},
                       const Eigen::VectorXd* warm_start = nullptr) {
  cfg.validate();
  if (prep.p == 0) fail(ErrorCode::ConfigInvalid, "no covariate columns");
  FitResult res;
  res.covariate_names = prep.names;
  res.n_events = prep.n_events;
  res.n_instances = prep.n_instances;
  res.n_groups = prep.groups.size();
  for (const auto& g : prep.groups)
    if (g.informative) ++res.n_informative;
  if (res.n_informative == 0)
    fail(ErrorCode::NoInformativeStrata,
         "no comparison group has both a case and a control");
  if (res.n_informative < res.n_groups)
    res.warnings.push_back(
        std::to_string(res.n_groups - res.n_informative) +
        " comparison groups without controls were skipped");

  const Eigen::Index p = prep.p;
  Eigen::VectorXd start =
      warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  NewtonOutcome nt = newton(prep, cfg, start, weights);
  if (nt.stalled)
    res.warnings.push_back("step search stalled before reaching tolerance");

  res.beta = to_std(nt.beta);
  res.log_lik = nt.eval.value;
  res.iterations = nt.iterations;
  res.converged = nt.converged;
  res.log_lik_null =
      evaluate(prep, Eigen::VectorXd::Zero(p), cfg.ties, weights, nullptr, false)
          .value;
  res.aic = 2.0 * double(p) - 2.0 * res.log_lik;

  for (Eigen::Index j = 0; j < p; ++j)
    if (std::abs(nt.beta[j]) > 15.0) {
      res.warnings.push_back("possible separation: estimate for " +
                             prep.names[std::size_t(j)] +
                             " exceeds 15 in magnitude");
      break;
    }

  if (p > 0) {
    Eigen::MatrixXd info = -nt.eval.hess;
    info.diagonal().array() += cfg.ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    const double resid = (info * cov - Eigen::MatrixXd::Identity(p, p)).norm();
    if (!cov.allFinite() || resid > 1e-4 * double(p))
      fail(ErrorCode::SingularHessian,
           "information matrix is singular at the optimum");
    res.se_model.resize(std::size_t(p));
    for (Eigen::Index j = 0; j < p; ++j)
      res.se_model[std::size_t(j)] = std::sqrt(std::max(0.0, cov(j, j)));

    if (cfg.robust) {
      std::vector<Eigen::VectorXd> scores;
      evaluate(prep, nt.beta, cfg.ties, weights, &scores);
      Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
      for (const auto& u : scores) meat.noalias() += u * u.transpose();
      Eigen::MatrixXd sandwich = cov * meat * cov;
      res.se_robust.resize(std::size_t(p));
      for (Eigen::Index j = 0; j < p; ++j)
        res.se_robust[std::size_t(j)] =
            std::sqrt(std::max(0.0, sandwich(j, j)));
    }
  }
  return res;
}

}  // namespace

Likelihood log_partial_likelihood(const ParsedInstances& data,
                                  std::span<const double> beta, TieMethod ties) {
  Prepared prep = prepare(data);
  if (Eigen::Index(beta.size()) != prep.p)
    fail(ErrorCode::ConfigInvalid, "beta length does not match covariates");
  Eigen::VectorXd b(prep.p);
  for (Eigen::Index j = 0; j < prep.p; ++j) b[j] = beta[std::size_t(j)];
  EvalResult ev = evaluate(prep, b, ties);
  Likelihood out;
  out.value = ev.value;
  out.grad = to_std(ev.grad);
  out.hess.resize(std::size_t(prep.p) * std::size_t(prep.p));
  for (Eigen::Index r = 0; r < prep.p; ++r)
    for (Eigen::Index c = 0; c < prep.p; ++c)
      out.hess[std::size_t(r * prep.p + c)] = ev.hess(r, c);
  return out;
}

FitResult fit(const ParsedInstances& data, const FitConfig& cfg) {
  Prepared prep = prepare(data);
  return fit_prepared(prep, cfg);
}

ContributionResult contribution_analysis(const ParsedInstances& data,
                                         const FitConfig& cfg) {
  Prepared prep = prepare(data);
  FitResult full = fit_prepared(prep, cfg);

  ContributionResult out;
  out.log_lik_full = full.log_lik;
  out.log_lik_null = full.log_lik_null;

  const std::size_t p = data.covariate_names.size();
  for (std::size_t j = 0; j < p; ++j) {
    ContributionRow row;
    row.name = data.covariate_names[j];

    std::vector<Eigen::Index> single{Eigen::Index(j)};
    Prepared sub = restrict_columns(prep, single);
    FitConfig sub_cfg = cfg;
    sub_cfg.robust = false;
    FitResult single_fit = fit_prepared(sub, sub_cfg);
    row.gain_over_null = single_fit.log_lik - single_fit.log_lik_null;

    if (p > 1) {
      std::vector<Eigen::Index> rest;
      for (std::size_t c = 0; c < p; ++c)
        if (c != j) rest.push_back(Eigen::Index(c));
      Prepared drop = restrict_columns(prep, rest);
      FitResult drop_fit = fit_prepared(drop, sub_cfg);
      row.loss_if_dropped = full.log_lik - drop_fit.log_lik;
    } else {
      row.loss_if_dropped = full.log_lik - full.log_lik_null;
    }
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const ContributionRow& a, const ContributionRow& b) {
                     return a.gain_over_null > b.gain_over_null;
                   });
  return out;
}

namespace {

BootstrapResult bootstrap_impl(
    const Prepared& prep, const FitConfig& cfg,
    const std::vector<std::vector<std::uint32_t>>& group_indices) {
  BootstrapResult out;
  out.covariate_names = prep.names;
  out.n_requested = int(group_indices.size());

  FitResult full = fit_prepared(prep, cfg);
  out.full_beta = full.beta;
  Eigen::VectorXd warm(prep.p);
  for (Eigen::Index j = 0; j < prep.p; ++j) warm[j] = full.beta[std::size_t(j)];

  FitConfig rep_cfg = cfg;
  rep_cfg.robust = false;

  std::vector<double> weights(prep.groups.size());
  for (const auto& indices : group_indices) {
    std::fill(weights.begin(), weights.end(), 0.0);
    for (auto gi : indices) {
      if (gi >= prep.groups.size())
        fail(ErrorCode::ConfigInvalid, "bootstrap group index out of range");
      weights[gi] += 1.0;
    }
    try {
      FitResult rep = fit_prepared(prep, rep_cfg, weights, &warm);
      out.estimates.push_back(rep.beta);
    } catch (const Error&) {
      ++out.n_failed;
    }
  }

  out.sign_agreement.assign(std::size_t(prep.p), 0.0);
  if (!out.estimates.empty()) {
    for (std::size_t j = 0; j < std::size_t(prep.p); ++j) {
      int match = 0;
      for (const auto& est : out.estimates)
        if ((est[j] >= 0) == (out.full_beta[j] >= 0)) ++match;
      out.sign_agreement[j] = double(match) / double(out.estimates.size());
    }
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap(const ParsedInstances& data, const FitConfig& cfg,
                          int replicates, std::uint64_t seed) {
  if (replicates < 1)
    fail(ErrorCode::ConfigInvalid, "bootstrap needs at least 1 replicate");
  Prepared prep = prepare(data);
  // Resampling unit: the informative stratum groups (uninformative ones carry
  // no likelihood contribution either way).
  std::vector<std::uint32_t> informative;
  for (std::uint32_t gi = 0; gi < prep.groups.size(); ++gi)
    if (prep.groups[gi].informative) informative.push_back(gi);
  std::vector<std::vector<std::uint32_t>> group_indices;
  group_indices.resize(std::size_t(replicates));
  for (int b = 0; b < replicates; ++b) {
    Rng rng = Rng::substream(seed, std::uint64_t(b));
    auto& row = group_indices[std::size_t(b)];
    row.resize(informative.size());
    for (auto& gi : row)
      gi = informative[rng.below(std::uint64_t(informative.size()))];
  }
  return bootstrap_impl(prep, cfg, group_indices);
}

BootstrapResult bootstrap_with_indices(
    const ParsedInstances& data, const FitConfig& cfg,
    const std::vector<std::vector<std::uint32_t>>& group_indices) {
  Prepared prep = prepare(data);
  return bootstrap_impl(prep, cfg, group_indices);
}

}  // namespace rhem
