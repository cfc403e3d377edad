#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sd/tune.hpp"

using namespace sd;

namespace {

// chi-squared critical value, 9 degrees of freedom, upper tail 0.01
constexpr double kChi2Crit9 = 21.665994;

FoldPlan plan_of(std::size_t n) {
    FoldPlan p;
    for (std::size_t i = 0; i < n; ++i) p.folds.push_back({static_cast<int>(i), {1}, {2}, {3}});
    return p;
}

} // namespace

TEST_CASE("samples stay within the search space") {
    const SearchSpace space;
    Rng rng(123);
    std::array<int, 10> bins{};
    for (int i = 0; i < 10000; ++i) {
        const Hyperparams hp = sample_hyperparams(space, rng);
        CHECK((hp.learning_rate >= 1e-6 && hp.learning_rate <= 1e-3));
        CHECK((hp.batch_size == 4 || hp.batch_size == 8 || hp.batch_size == 16));
        CHECK((hp.base_filters >= 8 && hp.base_filters <= 64));
        CHECK((hp.kernel_size == 3 || hp.kernel_size == 5 || hp.kernel_size == 7));
        CHECK((hp.dropout >= 0.0 && hp.dropout <= 0.5));
        CHECK((hp.alpha >= 0.3 && hp.alpha <= 0.7));
        CHECK((hp.gamma >= 1.0 && hp.gamma <= 2.0));
        CHECK(hp.beta == 1.0 - hp.alpha);
        const int b = std::min(9, static_cast<int>((std::log10(hp.learning_rate) + 6.0) / 0.3));
        ++bins[b];
    }
    double chi2 = 0;
    for (int n : bins) chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
    CHECK(chi2 < kChi2Crit9);
}

TEST_CASE("filter and choice extremes are reachable") {
    Rng rng(5);
    bool lo = false, hi = false;
    for (int i = 0; i < 5000; ++i) {
        const auto hp = sample_hyperparams(SearchSpace{}, rng);
        lo |= hp.base_filters == 8;
        hi |= hp.base_filters == 64;
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("sampling is deterministic") {
    Rng a(9), b(9);
    for (int i = 0; i < 50; ++i) {
        const auto x = sample_hyperparams(SearchSpace{}, a), y = sample_hyperparams(SearchSpace{}, b);
        CHECK(x.learning_rate == y.learning_rate);
        CHECK(x.base_filters == y.base_filters);
        CHECK(x.gamma == y.gamma);
    }
    SearchSpace bad;
    bad.lr_min = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("trial objective is the mean fold score") {
    const double scores[] = {0.5, 0.6, 0.7, 0.5, 0.6, 0.7};
    const Trial t = run_trial(3, Hyperparams{}, plan_of(6),
                              [&](const Hyperparams&, const Fold&, std::size_t i) { return scores[i]; });
    CHECK(t.status == TrialStatus::Complete);
    REQUIRE(t.objective.has_value());
    CHECK(*t.objective == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(t.fold_mmcc.size() == 6);

    const Trial one = run_trial(0, Hyperparams{}, plan_of(1), [](const Hyperparams&, const Fold&, std::size_t) {
        return 0.42;
    });
    CHECK(*one.objective == 0.42);

    const Trial failed = run_trial(1, Hyperparams{}, plan_of(6), [](const Hyperparams&, const Fold&, std::size_t i) {
        if (i == 2) throw std::runtime_error("diverged");
        return 0.5;
    });
    CHECK(failed.status == TrialStatus::Failed);
    CHECK_FALSE(failed.objective.has_value());
    CHECK(failed.error.find("diverged") != std::string::npos);
}

TEST_CASE("study picks the best trial") {
    const FoldPlan plan = plan_of(2);
    SUBCASE("thirty trials") {
        auto trainer = [](const Hyperparams& hp, const Fold&, std::size_t) { return std::log10(hp.learning_rate); };
        const StudyResult r = run_study(SearchSpace{}, 30, plan, trainer, 77);
        REQUIRE(r.trials.size() == 30);
        double best = -1e9;
        for (const auto& t : r.trials) best = std::max(best, *t.objective);
        CHECK(*r.best_trial().objective == best);
        const StudyResult again = run_study(SearchSpace{}, 30, plan, trainer, 77);
        CHECK(again.best == r.best);
        CHECK(again.trials[17].hp.learning_rate == r.trials[17].hp.learning_rate);
    }
    SUBCASE("single trial") {
        const StudyResult r = run_study(SearchSpace{}, 1, plan, [](const Hyperparams&, const Fold&, std::size_t) {
            return 0.3;
        }, 1);
        CHECK(r.best == 0);
    }
    SUBCASE("ties go to the lower id") {
        const StudyResult r = run_study(SearchSpace{}, 5, plan, [](const Hyperparams&, const Fold&, std::size_t) {
            return 0.7;
        }, 2);
        CHECK(r.best_trial().id == 0);
    }
    SUBCASE("failed trials are skipped") {
        int calls = 0;
        const StudyResult r = run_study(SearchSpace{}, 4, plan, [&](const Hyperparams&, const Fold&, std::size_t) {
            if (calls++ < 2) throw std::runtime_error("boom");
            return 0.1;
        }, 3);
        CHECK(r.trials[0].status == TrialStatus::Failed);
        CHECK(r.best_trial().status == TrialStatus::Complete);
    }
    SUBCASE("all failures") {
        CHECK_THROWS_AS(run_study(SearchSpace{}, 3, plan,
                                  [](const Hyperparams&, const Fold&, std::size_t) -> double {
                                      throw std::runtime_error("no");
                                  },
                                  4),
                        StudyError);
    }
}

TEST_CASE("trial log line") {
    Trial t;
    t.id = 4;
    t.fold_mmcc = {0.5};
    t.objective = 0.5;
    const std::string j = trial_json(t);
    CHECK(j.front() == '{');
    CHECK(j.find("\"id\":4") != std::string::npos);
    CHECK(j.find('\n') == std::string::npos);
}
