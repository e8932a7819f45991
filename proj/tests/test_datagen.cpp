#include "samplecurve/datagen.hpp"
#include "samplecurve/ranks.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <vector>

using namespace samplecurve;

namespace {

GeneratorSpec binary_spec(int n_true, double prevalence, double target_auc,
                          double rho = 0.0) {
    GeneratorSpec spec;
    spec.outcome_type = OutcomeType::binary;
    spec.n_true = n_true;
    spec.predictor_correlation = rho;
    spec.target_prevalence = prevalence;
    spec.target_performance = target_auc;
    return spec;
}

// Independent oracle for the intercept: mean sigmoid(beta0 + Z) over its own
// mt19937 normal draws, solved by bisection on the same draws.
double oracle_intercept_one_predictor(double target) {
    std::mt19937_64 rng(987654321);
    std::normal_distribution<double> normal;
    std::vector<double> z(1000000);
    for (double& v : z) v = normal(rng);
    auto mean_prob = [&](double beta0) {
        double acc = 0.0;
        for (double v : z) acc += 1.0 / (1.0 + std::exp(-(beta0 + v)));
        return acc / static_cast<double>(z.size());
    };
    double lo = -20.0, hi = 20.0;
    for (int i = 0; i < 50; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mean_prob(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("tune_intercept closed forms", "[datagen]") {
    const GeneratorSpec spec = binary_spec(1, 0.3, 0.75);

    // no signal: beta0 is the logit of the prevalence
    const double b0 = tune_intercept(spec, {0.0}, 0.3, 200000, 11);
    CHECK_THAT(b0, Catch::Matchers::WithinAbs(std::log(0.3 / 0.7), 0.01));

    // symmetric predictors at prevalence 1/2: exactly zero under antithetic draws
    const double b_sym = tune_intercept(spec, {1.7}, 0.5, 200000, 11);
    CHECK_THAT(b_sym, Catch::Matchers::WithinAbs(0.0, 5e-3));
}

TEST_CASE("tune_intercept matches an independent Monte Carlo oracle", "[datagen]") {
    const GeneratorSpec spec = binary_spec(1, 0.2, 0.75);
    const double b0 = tune_intercept(spec, {1.0}, 0.2, 1000000, 5);
    const double oracle = oracle_intercept_one_predictor(0.2);
    CHECK_THAT(b0, Catch::Matchers::WithinAbs(oracle, 0.01));
}

TEST_CASE("tune_intercept error paths", "[datagen]") {
    const GeneratorSpec spec = binary_spec(1, 0.3, 0.75);
    CHECK_THROWS_AS(tune_intercept(spec, {1.0}, 0.3, 1000, 1), InvalidSpec);
    CHECK_THROWS_AS(tune_intercept(spec, {1.0}, 0.995, 200000, 1), InvalidSpec);
    GeneratorSpec cont = spec;
    cont.outcome_type = OutcomeType::continuous;
    CHECK_THROWS_AS(tune_intercept(cont, {1.0}, 0.3, 200000, 1), InvalidSpec);
}

TEST_CASE("tune_scale chance level forces zero signal", "[datagen]") {
    const TunedGenerator gen = tune_scale(binary_spec(2, 0.4, 0.5), 200000, 3);
    CHECK(gen.coefficient_scale == 0.0);
    CHECK(gen.achieved_performance == 0.5);
    CHECK_THAT(gen.achieved_prevalence, Catch::Matchers::WithinAbs(0.4, 0.002));
}

TEST_CASE("tune_scale continuous solves noise sd analytically", "[datagen]") {
    GeneratorSpec spec;
    spec.outcome_type = OutcomeType::continuous;
    spec.n_true = 1;
    spec.target_performance = 0.5;
    const TunedGenerator gen = tune_scale(spec, 200000, 17);
    // var(eta) = 1, so R^2 = 0.5 needs sigma = 1
    CHECK_THAT(gen.noise_sd, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(gen.coefficient_scale == 1.0);
    CHECK_THAT(gen.achieved_performance, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("tune_scale hits prevalence and AUC on an independent draw", "[datagen]") {
    const TunedGenerator gen = tune_scale(binary_spec(10, 0.063, 0.82), 200000, 20260810);
    CHECK(gen.coefficient_scale > 0.0);
    CHECK_THAT(gen.achieved_prevalence, Catch::Matchers::WithinAbs(0.063, 0.002));
    CHECK_THAT(gen.achieved_performance, Catch::Matchers::WithinAbs(0.82, 0.005));
    CHECK(gen.achieved_performance_se > 0.0);
}

TEST_CASE("tune_scale rejects targets outside the allowed range", "[datagen]") {
    GeneratorSpec spec = binary_spec(1, 0.5, 0.9995);
    CHECK_THROWS_AS(tune_scale(spec, 200000, 1), InvalidSpec);
}

TEST_CASE("generate degenerate and determinism contracts", "[datagen]") {
    const TunedGenerator gen = tune_scale(binary_spec(3, 0.3, 0.7), 200000, 9);

    const Dataset empty = generate(gen, 0, 9, stream_id(StreamDomain::dev, 0, 1));
    CHECK(empty.n() == 0);
    CHECK(empty.p() == 3);

    const auto s = stream_id(StreamDomain::dev, 100, 7);
    const Dataset d1 = generate(gen, 100, 9, s);
    const Dataset d2 = generate(gen, 100, 9, s);
    CHECK(d1.predictors == d2.predictors);
    CHECK(d1.outcomes == d2.outcomes);
    CHECK(d1.true_prob == d2.true_prob);

    const Dataset d3 = generate(gen, 100, 9, stream_id(StreamDomain::dev, 100, 8));
    CHECK(d1.outcomes != d3.outcomes);
}

TEST_CASE("generate matches target correlation and prevalence", "[datagen]") {
    const TunedGenerator gen = tune_scale(binary_spec(4, 0.25, 0.75, 0.3), 200000, 31);
    const std::int64_t n = 100000;
    const Dataset data = generate(gen, n, 31, stream_id(StreamDomain::dev, n, 1));

    const Matrix& x = data.predictors;
    const Vector mean = x.colwise().mean();
    for (int j = 0; j < 4; ++j) {
        for (int k = j + 1; k < 4; ++k) {
            double cov = 0.0, vj = 0.0, vk = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const double a = x(i, j) - mean(j);
                const double b = x(i, k) - mean(k);
                cov += a * b;
                vj += a * a;
                vk += b * b;
            }
            const double corr = cov / std::sqrt(vj * vk);
            CHECK_THAT(corr, Catch::Matchers::WithinAbs(0.3, 0.02));
        }
    }
    CHECK_THAT(data.outcomes.mean(), Catch::Matchers::WithinAbs(0.25, 0.005));

    bool outcomes_binary = true;
    bool probs_in_range = true;
    for (std::int64_t i = 0; i < n; ++i) {
        outcomes_binary =
            outcomes_binary && (data.outcomes(i) == 0.0 || data.outcomes(i) == 1.0);
        probs_in_range =
            probs_in_range && data.true_prob(i) >= 0.0 && data.true_prob(i) <= 1.0;
    }
    CHECK(outcomes_binary);
    CHECK(probs_in_range);
}

TEST_CASE("large-sample AUC is nondecreasing in the coefficient scale", "[datagen]") {
    const GeneratorSpec spec = binary_spec(3, 0.3, 0.8);
    const std::vector<double> pattern = spec.pattern_weights();
    double prev_auc = 0.0;
    for (double c : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> scaled = pattern;
        for (double& v : scaled) v *= c;
        TunedGenerator gen;
        gen.spec = spec;
        gen.coefficient_scale = c;
        gen.intercept = tune_intercept(spec, scaled, 0.3, 200000, 77);
        const Dataset data = generate(gen, 30000, 77, stream_id(StreamDomain::val, 0, 0));
        double auc_c = 0.5;
        if (c > 0.0) {
            auc_c = auc(std::span<const double>(data.true_prob.data(),
                                                static_cast<std::size_t>(data.n())),
                        std::span<const double>(data.outcomes.data(),
                                                static_cast<std::size_t>(data.n())));
        }
        CHECK(auc_c >= prev_auc - 0.002);
        prev_auc = auc_c;
    }
}

TEST_CASE("prevalence neutral under pattern change", "[datagen]") {
    GeneratorSpec geo = binary_spec(5, 0.15, 0.78);
    geo.coefficient_pattern = CoefficientPattern::geometric_decay;
    geo.pattern_ratio = 0.6;
    const TunedGenerator gen = tune_scale(geo, 200000, 4);
    CHECK_THAT(gen.achieved_prevalence, Catch::Matchers::WithinAbs(0.15, 0.002));
    CHECK_THAT(gen.achieved_performance, Catch::Matchers::WithinAbs(0.78, 0.005));
}

TEST_CASE("equicorrelation matrix admits a Cholesky factor", "[datagen]") {
    for (double rho : {0.0, 0.2, 0.5, 0.8, 0.95}) {
        const int p = 12;
        Matrix sigma = Matrix::Constant(p, p, rho);
        sigma.diagonal().setOnes();
        Eigen::LLT<Matrix> llt(sigma);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("generator spec validation", "[datagen]") {
    GeneratorSpec spec = binary_spec(0, 0.3, 0.7);
    spec.n_noise = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec = binary_spec(2, 0.005, 0.7);
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec = binary_spec(2, 0.3, 0.7, 0.99);
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec = binary_spec(0, 0.3, 0.7);
    spec.n_noise = 3; // noise only but AUC above chance
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
}
