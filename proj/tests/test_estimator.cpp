#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rhem/estimator.hpp"
#include "stream_gen.hpp"

using namespace rhem;

namespace {

ErrorCode thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rhem::Error");
  return ErrorCode::IoError;
}

// One row per pair: (is_case, covariate values). Each call adds a fresh
// stratum/event so groups line up with the argument list.
ParsedInstances make_table(std::vector<std::string> names,
                           const std::vector<std::vector<
                               std::pair<bool, std::vector<double>>>>& groups) {
  ParsedInstances data;
  data.covariate_names = std::move(names);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& [is_case, x] : groups[g]) {
      ParsedRow row;
      row.event_index = std::uint32_t(g);
      row.time = double(g + 1);
      row.stratum = "g" + std::to_string(g);
      row.is_case = is_case;
      row.n_authors = 1;
      row.n_refs = 1;
      row.x = x;
      data.rows.push_back(std::move(row));
    }
  }
  return data;
}

ParsedInstances random_instances(std::uint64_t seed, int n_events,
                                 int n_covariates) {
  auto rng = Rng::substream(seed, 17);
  EventStream s = testgen::random_stream(rng, n_events, 6, 5);
  SamplingConfig cfg;
  cfg.q = 5;
  cfg.seed = seed;
  auto all = default_covariates(Model::Joint);
  all.resize(std::size_t(n_covariates));
  return to_parsed(build_instance_table(s, all, cfg, DecayConfig{3.0}));
}

}  // namespace

TEST_CASE("stratum grouping keys rows by label in first-appearance order") {
  ParsedInstances data = make_table(
      {"x"}, {{{true, {1}}, {true, {0}}, {false, {1}}}, {{true, {0}}}});
  auto groups = group_strata(data);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].stratum == "g0");
  CHECK(groups[0].pool.size() == 3);
  CHECK(groups[0].cases.size() == 2);
  CHECK(groups[0].informative);
  CHECK(groups[1].pool.size() == 1);
  CHECK_FALSE(groups[1].informative);  // case only, nothing to compare
}

TEST_CASE("a stratum without any case is rejected") {
  ParsedInstances data =
      make_table({"x"}, {{{true, {1}}, {false, {0}}}, {{false, {1}}}});
  CHECK(thrown_code([&] { group_strata(data); }) == ErrorCode::NoCaseInStratum);
}

TEST_CASE("likelihood at zero is minus log of the group sizes") {
  ParsedInstances data = make_table(
      {"x"},
      {{{true, {1}}, {false, {2}}, {false, {3}}, {false, {4}}, {false, {5}},
        {false, {6}}},
       {{true, {0.5}}, {false, {1.5}}, {false, {2.5}}}});
  std::vector<double> zero{0.0};
  auto lk = log_partial_likelihood(data, zero, TieMethod::Efron);
  CHECK(std::fabs(lk.value - (-std::log(6.0) - std::log(3.0))) <= 1e-12);
}

TEST_CASE("one case-control pair has a closed-form likelihood") {
  ParsedInstances data = make_table({"x"}, {{{true, {1}}, {false, {0}}}});
  std::vector<double> beta{std::log(3.0)};
  auto lk = log_partial_likelihood(data, beta, TieMethod::Efron);
  CHECK(std::fabs(lk.value - std::log(3.0 / 4.0)) <= 1e-12);
  // Score is case value minus pool mean under the fitted weights.
  CHECK(std::fabs(lk.grad[0] - (1.0 - 3.0 / 4.0)) <= 1e-12);
}

TEST_CASE("tied cases interpolate the risk pool under one method only") {
  ParsedInstances data = make_table(
      {"x"},
      {{{true, {1}}, {true, {0}}, {false, {0}}, {false, {0}}}});
  std::vector<double> beta{0.5};
  const double s = std::exp(0.5) + 3.0;
  const double d = std::exp(0.5) + 1.0;

  auto efron = log_partial_likelihood(data, beta, TieMethod::Efron);
  CHECK(std::fabs(efron.value - (0.5 - std::log(s) - std::log(s - d / 2.0))) <=
        1e-12);

  auto breslow = log_partial_likelihood(data, beta, TieMethod::Breslow);
  CHECK(std::fabs(breslow.value - (0.5 - 2.0 * std::log(s))) <= 1e-12);
  CHECK(efron.value != breslow.value);
}

TEST_CASE("tie methods agree exactly when no stratum has two cases") {
  ParsedInstances data = random_instances(31, 14, 4);
  // Split any shared stratum apart so every group keeps a single case.
  for (auto& row : data.rows)
    row.stratum += "#" + std::to_string(row.event_index);
  std::vector<double> beta{0.3, -0.2, 0.1, 0.05};
  auto efron = log_partial_likelihood(data, beta, TieMethod::Efron);
  auto breslow = log_partial_likelihood(data, beta, TieMethod::Breslow);
  CHECK(efron.value == breslow.value);
  CHECK(efron.grad == breslow.grad);
  CHECK(efron.hess == breslow.hess);
}

TEST_CASE("analytic derivatives match central finite differences") {
  for (TieMethod ties : {TieMethod::Efron, TieMethod::Breslow}) {
    ParsedInstances data = random_instances(ties == TieMethod::Efron ? 5 : 6,
                                            16, 5);
    auto rng = Rng::substream(77, unsigned(ties));
    std::size_t p = data.covariate_names.size();
    std::vector<double> beta(p);
    for (auto& b : beta) b = rng.next_double() - 0.5;

    auto at = [&](std::vector<double> b) {
      return log_partial_likelihood(data, b, ties);
    };
    auto base = at(beta);
    const double h = 1e-5;
    for (std::size_t j = 0; j < p; ++j) {
      auto hi = beta, lo = beta;
      hi[j] += h;
      lo[j] -= h;
      double fd = (at(hi).value - at(lo).value) / (2 * h);
      CHECK(std::fabs(base.grad[j] - fd) <=
            1e-6 * (1.0 + std::fabs(base.grad[j])));
      auto ghi = at(hi).grad;
      auto glo = at(lo).grad;
      for (std::size_t k = 0; k < p; ++k) {
        double fd2 = (ghi[k] - glo[k]) / (2 * h);
        CHECK(std::fabs(base.hess[j * p + k] - fd2) <= 1e-4);
      }
    }
  }
}

TEST_CASE("the one-covariate alternating design has a closed-form optimum") {
  // Three groups where the case carries the covariate and one reversed group:
  // the score zeroes at beta = log 3 with curvature 3/4.
  ParsedInstances data = make_table(
      {"x"}, {{{true, {1}}, {false, {0}}},
              {{true, {1}}, {false, {0}}},
              {{true, {1}}, {false, {0}}},
              {{true, {0}}, {false, {1}}}});
  FitConfig cfg;
  FitResult res = fit(data, cfg);

  CHECK(res.converged);
  CHECK(res.iterations < cfg.max_iterations);
  CHECK(std::fabs(res.beta[0] - std::log(3.0)) <= 1e-8);
  CHECK(std::fabs(res.log_lik - (3 * std::log(3.0) - 4 * std::log(4.0))) <=
        1e-10);
  CHECK(std::fabs(res.log_lik_null - (-4 * std::log(2.0))) <= 1e-12);
  CHECK(std::fabs(res.aic - (2.0 - 2.0 * res.log_lik)) <= 1e-12);
  CHECK(std::fabs(res.se_model[0] - std::sqrt(4.0 / 3.0)) <= 1e-8);
  REQUIRE(res.se_robust.size() == 1);
  CHECK(std::fabs(res.se_robust[0] - std::sqrt(4.0 / 3.0)) <= 1e-8);
  CHECK(res.n_events == 4);
  CHECK(res.n_instances == 8);
  CHECK(res.n_groups == 4);
  CHECK(res.n_informative == 4);
  CHECK(res.warnings.empty());

  FitConfig no_rob = cfg;
  no_rob.robust = false;
  CHECK(fit(data, no_rob).se_robust.empty());
}

TEST_CASE("a balanced design keeps the start point optimal") {
  ParsedInstances data = make_table(
      {"x"}, {{{true, {1}}, {false, {0}}}, {{true, {0}}, {false, {1}}}});
  FitResult res = fit(data, FitConfig{});
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(res.beta[0] == 0.0);
  CHECK(res.log_lik == res.log_lik_null);
  CHECK(std::fabs(res.se_model[0] - std::sqrt(2.0)) <= 1e-12);
}

TEST_CASE("strata without controls are skipped with a warning") {
  ParsedInstances data = make_table(
      {"x"}, {{{true, {1}}, {false, {0}}}, {{true, {1}}}});
  FitResult res = fit(data, FitConfig{});
  CHECK(res.n_groups == 2);
  CHECK(res.n_informative == 1);
  REQUIRE(!res.warnings.empty());
  CHECK(res.warnings[0].find("skipped") != std::string::npos);
}

TEST_CASE("a table with no informative stratum cannot be fit") {
  ParsedInstances data = make_table({"x"}, {{{true, {1}}}, {{true, {0}}}});
  CHECK(thrown_code([&] { fit(data, FitConfig{}); }) ==
        ErrorCode::NoInformativeStrata);
}

TEST_CASE("perfectly separated data is flagged") {
  std::vector<std::vector<std::pair<bool, std::vector<double>>>> groups;
  for (int g = 0; g < 20; ++g)
    groups.push_back({{true, {1}}, {false, {0}}});
  ParsedInstances data = make_table({"x"}, groups);
  FitResult res = fit(data, FitConfig{});
  bool flagged = false;
  for (const auto& w : res.warnings)
    flagged = flagged || w.find("separation") != std::string::npos;
  CHECK(flagged);
  CHECK(res.beta[0] > 15.0);
}

TEST_CASE("duplicated covariate columns make the information singular") {
  ParsedInstances data = make_table(
      {"x", "copy"}, {{{true, {1, 1}}, {false, {0, 0}}},
                      {{true, {0, 0}}, {false, {1, 1}}},
                      {{true, {1, 1}}, {false, {0, 0}}}});
  CHECK(thrown_code([&] { fit(data, FitConfig{}); }) ==
        ErrorCode::SingularHessian);

  FitConfig ridged;
  ridged.ridge = 1e-6;
  FitResult res = fit(data, ridged);
  CHECK(res.converged);
  // The two copies share the explanatory load.
  CHECK(std::fabs(res.beta[0] - res.beta[1]) <= 1e-6);
}

TEST_CASE("mismatched covariate widths are rejected") {
  ParsedInstances data = make_table({"x", "y"},
                                    {{{true, {1, 0}}, {false, {0, 1}}}});
  data.rows[1].x.pop_back();
  CHECK(thrown_code([&] { fit(data, FitConfig{}); }) ==
        ErrorCode::MalformedRecord);
}

TEST_CASE("contribution ranks the informative covariate first") {
  auto rng = Rng::substream(404, 0);
  std::vector<std::vector<std::pair<bool, std::vector<double>>>> groups;
  for (int g = 0; g < 40; ++g) {
    double z1 = rng.next_double() - 0.5;
    double z2 = rng.next_double() - 0.5;
    groups.push_back({{true, {1, z1}}, {false, {0, z2}}});
  }
  ParsedInstances data = make_table({"signal", "noise"}, groups);

  ContributionResult contrib = contribution_analysis(data, FitConfig{});
  REQUIRE(contrib.rows.size() == 2);
  CHECK(contrib.rows[0].name == "signal");
  CHECK(contrib.rows[0].gain_over_null > contrib.rows[1].gain_over_null);
  CHECK(contrib.log_lik_full >= contrib.log_lik_null);

  // A duplicated column adds nothing once its twin is in the model.
  ParsedInstances dup = data;
  dup.covariate_names.push_back("signal_copy");
  for (auto& row : dup.rows) row.x.push_back(row.x[0]);
  FitConfig ridged;
  ridged.ridge = 1e-6;
  ContributionResult c2 = contribution_analysis(dup, ridged);
  double improvement = c2.log_lik_full - c2.log_lik_null;
  for (const auto& row : c2.rows)
    if (row.name == "signal_copy")
      CHECK(std::fabs(row.loss_if_dropped) < 0.001 * improvement);
}

TEST_CASE("bootstrap over the identity resample reproduces the full fit") {
  auto rng = Rng::substream(808, 0);
  std::vector<std::vector<std::pair<bool, std::vector<double>>>> spec;
  for (int g = 0; g < 30; ++g) {
    bool flip = rng.below(5) == 0;
    spec.push_back({{true, {flip ? 0.0 : 1.0, rng.next_double() - 0.5}},
                    {false, {flip ? 1.0 : 0.0, rng.next_double() - 0.5}}});
  }
  ParsedInstances data = make_table({"x", "z"}, spec);
  auto groups = group_strata(data);
  std::vector<std::uint32_t> identity;
  for (std::uint32_t gi = 0; gi < groups.size(); ++gi)
    if (groups[gi].informative) identity.push_back(gi);

  BootstrapResult res =
      bootstrap_with_indices(data, FitConfig{}, {identity, identity});
  REQUIRE(res.estimates.size() == 2);
  CHECK(res.n_failed == 0);
  for (const auto& est : res.estimates)
    for (std::size_t j = 0; j < est.size(); ++j)
      CHECK(std::fabs(est[j] - res.full_beta[j]) <= 1e-7);
  for (double s : res.sign_agreement) CHECK(s == 1.0);
}

TEST_CASE("seeded bootstrap is reproducible and sign-stable on strong effects") {
  std::vector<std::vector<std::pair<bool, std::vector<double>>>> groups;
  auto rng = Rng::substream(2024, 7);
  for (int g = 0; g < 60; ++g) {
    // Strong positive effect with occasional contrary pairs.
    bool flip = rng.below(10) == 0;
    groups.push_back({{true, {flip ? 0.0 : 1.0}}, {false, {flip ? 1.0 : 0.0}}});
  }
  ParsedInstances data = make_table({"x"}, groups);

  auto b1 = bootstrap(data, FitConfig{}, 25, 99);
  auto b2 = bootstrap(data, FitConfig{}, 25, 99);
  CHECK(b1.estimates == b2.estimates);
  CHECK(b1.n_requested == 25);
  CHECK(b1.n_failed == 0);
  REQUIRE(b1.sign_agreement.size() == 1);
  CHECK(b1.sign_agreement[0] == 1.0);

  auto b3 = bootstrap(data, FitConfig{}, 25, 100);
  CHECK(b1.estimates != b3.estimates);
}
