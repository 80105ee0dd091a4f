#pragma once

#include "gpfs/gp.hpp"
#include "gpfs/kernel.hpp"
#include "gpfs/linalg.hpp"
#include "gpfs/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gpfs::verify {

/// A seeded random regression problem.
struct Instance {
    KernelSpec spec;
    double noise_sq = 0.01;
    FeatureSet support_x;
    Matrix support_y;
    FeatureSet query_x;
};

struct InstanceLimits {
    std::size_t max_support = 50;
    std::size_t max_query = 20;
    std::size_t max_dim = 8;
    std::size_t max_encoding = 4;
};

[[nodiscard]] Instance random_instance(std::uint64_t seed, KernelFamily family, const InstanceLimits& limits = {});

/// Ridge regression mean x_qᵀ(XᵀX + σ²I_D)⁻¹Xᵀy, solved in feature space by its
/// own Gaussian elimination. Independent of the GP code path.
[[nodiscard]] Matrix ridge_mean(const FeatureSet& support_x, const Matrix& support_y, const FeatureSet& query_x,
                                double noise_sq);

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::size_t checked = 0;
    double worst = 0.0;  // largest observed deviation
    double tolerance = 0.0;
    std::optional<std::uint64_t> failing_seed;
    std::string detail;
};

[[nodiscard]] PropertyResult check_oracle_equivalence(std::size_t instances, std::uint64_t seed, double tol = 1e-8);
[[nodiscard]] PropertyResult check_ridge_equivalence(std::size_t instances, std::uint64_t seed, double tol = 1e-6);
[[nodiscard]] PropertyResult check_variance_monotonicity(std::size_t instances, std::uint64_t seed,
                                                         double slack = 1e-9);
[[nodiscard]] PropertyResult check_support_permutation(std::size_t instances, std::uint64_t seed, double tol = 1e-10);
[[nodiscard]] PropertyResult check_query_permutation(std::size_t instances, std::uint64_t seed);
[[nodiscard]] PropertyResult check_interpolation(std::size_t instances, std::uint64_t seed, double tol = 1e-4);
[[nodiscard]] PropertyResult check_prior_recovery(std::uint64_t seed, double tol = 1e-6);

/// Every property above, each run once.
[[nodiscard]] std::vector<PropertyResult> run_suite(std::size_t instances, std::uint64_t seed);

}  // namespace gpfs::verify
