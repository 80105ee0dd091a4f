#include "gpfs/verify.hpp"

#include "gpfs/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpfs::verify {

namespace {

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(p[i - 1], p[rng.below(i)]);
    }
    return p;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        std::copy(m.row(perm[i]).begin(), m.row(perm[i]).end(), out.row(i).begin());
    }
    return out;
}

Matrix take_rows(const Matrix& m, std::size_t count) {
    Matrix out(count, m.cols());
    std::copy(m.data().begin(), m.data().begin() + static_cast<std::ptrdiff_t>(count * m.cols()), out.data().begin());
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

KernelFamily family_for(std::size_t i) {
    constexpr KernelFamily families[] = {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic,
                                         KernelFamily::Linear};
    return families[i % 3];
}

// Records a deviation; the first instance exceeding the tolerance marks the failure.
void observe(PropertyResult& r, double deviation, std::uint64_t seed) {
    r.worst = std::max(r.worst, deviation);
    if (!(deviation <= r.tolerance) && r.passed) {
        r.passed = false;
        r.failing_seed = seed;
    }
}

void observe_error(PropertyResult& r, const Error& e, std::uint64_t seed) {
    if (r.passed) {
        r.passed = false;
        r.failing_seed = seed;
        r.detail = e.what();
    }
}

PropertyResult make_result(const char* name, double tol) {
    PropertyResult r;
    r.name = name;
    r.tolerance = tol;
    return r;
}

}  // namespace

Instance random_instance(std::uint64_t seed, KernelFamily family, const InstanceLimits& limits) {
    Rng rng(seed);
    const std::size_t n_s = between(rng, 1, limits.max_support);
    const std::size_t n_q = between(rng, 1, limits.max_query);
    const std::size_t d = between(rng, 1, limits.max_dim);
    const std::size_t e = between(rng, 1, limits.max_encoding);

    Instance inst;
    inst.spec.family = family;
    inst.spec.sigma_f_sq = rng.uniform(0.5, 2.0);
    inst.spec.length_sq = default_length_sq(d) * rng.uniform(0.5, 2.0);
    inst.spec.alpha = family == KernelFamily::RationalQuadratic ? rng.uniform(0.5, 3.0) : 1.0;
    inst.noise_sq = rng.uniform(0.01, 0.1);
    inst.support_x = FeatureSet(gaussian_matrix(rng, n_s, d));
    inst.support_y = gaussian_matrix(rng, n_s, e);
    inst.query_x = FeatureSet(gaussian_matrix(rng, n_q, d));
    return inst;
}

Matrix ridge_mean(const FeatureSet& support_x, const Matrix& support_y, const FeatureSet& query_x, double noise_sq) {
    const std::size_t d = support_x.d();
    const std::size_t e = support_y.cols();
    // Augmented system [XᵀX + σ²I | XᵀY], D × (D + E).
    Matrix sys(d, d + e);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < support_x.n(); ++i) s += support_x.row(i)[a] * support_x.row(i)[b];
            sys(a, b) = s + (a == b ? noise_sq : 0.0);
        }
        for (std::size_t c = 0; c < e; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < support_x.n(); ++i) s += support_x.row(i)[a] * support_y(i, c);
            sys(a, d + c) = s;
        }
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::abs(sys(r, col)) > std::abs(sys(piv, col))) piv = r;
        }
        if (sys(piv, col) == 0.0) {
            throw Error(ErrorKind::SingularJoint, "ridge system is singular");
        }
        for (std::size_t c = 0; c < d + e; ++c) std::swap(sys(col, c), sys(piv, c));
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = sys(r, col) / sys(col, col);
            for (std::size_t c = col; c < d + e; ++c) sys(r, c) -= f * sys(col, c);
        }
    }
    Matrix weights(d, e);
    for (std::size_t c = 0; c < e; ++c) {
        for (std::size_t r = d; r-- > 0;) {
            double s = sys(r, d + c);
            for (std::size_t k = r + 1; k < d; ++k) s -= sys(r, k) * weights(k, c);
            weights(r, c) = s / sys(r, r);
        }
    }
    Matrix mean(query_x.n(), e);
    for (std::size_t j = 0; j < query_x.n(); ++j) {
        for (std::size_t c = 0; c < e; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += query_x.row(j)[k] * weights(k, c);
            mean(j, c) = s;
        }
    }
    return mean;
}

PropertyResult check_oracle_equivalence(std::size_t instances, std::uint64_t seed, double tol) {
    PropertyResult r = make_result("oracle_equivalence", tol);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const Instance inst = random_instance(s, family_for(i));
            const GPModel model = fit(inst.spec, inst.noise_sq, inst.support_x, inst.support_y);
            const Posterior fast = predict(model, inst.query_x, true);
            const Posterior slow = naive_condition(inst.spec, inst.noise_sq, inst.support_x, inst.support_y, inst.query_x);
            double dev = gpfs::max_abs_diff(fast.mean, slow.mean);
            dev = std::max(dev, max_abs_diff(fast.variance, slow.variance));
            dev = std::max(dev, gpfs::max_abs_diff(*fast.full_cov, *slow.full_cov));
            observe(r, dev, s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_ridge_equivalence(std::size_t instances, std::uint64_t seed, double tol) {
    PropertyResult r = make_result("ridge_equivalence", tol);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const Instance inst = random_instance(s, KernelFamily::Linear);
            const GPModel model = fit(inst.spec, inst.noise_sq, inst.support_x, inst.support_y);
            const Posterior post = predict(model, inst.query_x);
            const Matrix ridge = ridge_mean(inst.support_x, inst.support_y, inst.query_x, inst.noise_sq);
            observe(r, gpfs::max_abs_diff(post.mean, ridge), s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_variance_monotonicity(std::size_t instances, std::uint64_t seed, double slack) {
    PropertyResult r = make_result("variance_monotonicity", slack);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const Instance inst = random_instance(s, family_for(i));
            std::vector<double> previous = gram_diagonal(inst.spec, inst.query_x);
            // Worst increase of any query variance as support rows are appended one by one.
            double worst_increase = 0.0;
            for (std::size_t m = 1; m <= inst.support_x.n(); ++m) {
                const GPModel model = fit(inst.spec, inst.noise_sq, FeatureSet(take_rows(inst.support_x.matrix(), m)),
                                          take_rows(inst.support_y, m));
                const Posterior post = predict(model, inst.query_x);
                for (std::size_t j = 0; j < post.variance.size(); ++j) {
                    worst_increase = std::max(worst_increase, post.variance[j] - previous[j]);
                }
                previous = post.variance;
            }
            observe(r, worst_increase, s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_support_permutation(std::size_t instances, std::uint64_t seed, double tol) {
    PropertyResult r = make_result("support_permutation_invariance", tol);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const Instance inst = random_instance(s, family_for(i));
            Rng rng(derive_seed(s, 1));
            const auto perm = random_permutation(rng, inst.support_x.n());
            const GPModel base = fit(inst.spec, inst.noise_sq, inst.support_x, inst.support_y);
            const GPModel shuffled = fit(inst.spec, inst.noise_sq, FeatureSet(permute_rows(inst.support_x.matrix(), perm)),
                                         permute_rows(inst.support_y, perm));
            const Posterior a = predict(base, inst.query_x, true);
            const Posterior b = predict(shuffled, inst.query_x, true);
            double dev = gpfs::max_abs_diff(a.mean, b.mean);
            dev = std::max(dev, max_abs_diff(a.variance, b.variance));
            dev = std::max(dev, gpfs::max_abs_diff(*a.full_cov, *b.full_cov));
            observe(r, dev, s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_query_permutation(std::size_t instances, std::uint64_t seed) {
    PropertyResult r = make_result("query_permutation_equivariance", 0.0);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const Instance inst = random_instance(s, family_for(i));
            Rng rng(derive_seed(s, 2));
            const auto perm = random_permutation(rng, inst.query_x.n());
            const GPModel model = fit(inst.spec, inst.noise_sq, inst.support_x, inst.support_y);
            const Posterior a = predict(model, inst.query_x, true);
            const Posterior b = predict(model, FeatureSet(permute_rows(inst.query_x.matrix(), perm)), true);
            double dev = 0.0;
            for (std::size_t j = 0; j < perm.size(); ++j) {
                dev = std::max(dev, max_abs_diff(b.mean.row(j), a.mean.row(perm[j])));
                dev = std::max(dev, std::abs(b.variance[j] - a.variance[perm[j]]));
                for (std::size_t k = 0; k < perm.size(); ++k) {
                    dev = std::max(dev, std::abs((*b.full_cov)(j, k) - (*a.full_cov)(perm[j], perm[k])));
                }
            }
            observe(r, dev, s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_interpolation(std::size_t instances, std::uint64_t seed, double tol) {
    PropertyResult r = make_result("interpolation", tol);
    // Stationary kernels only: the linear kernel has rank ≤ D and cannot interpolate.
    const InstanceLimits limits{30, 1, 8, 4};
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t s = derive_seed(seed, i);
        try {
            const KernelFamily family = i % 2 == 0 ? KernelFamily::SquaredExponential : KernelFamily::RationalQuadratic;
            Instance inst = random_instance(s, family, limits);
            if (inst.support_x.d() < 4) {
                // Low-dimensional draws put support points close enough to be ill-conditioned.
                Rng rng(derive_seed(s, 3));
                inst.support_x = FeatureSet(gaussian_matrix(rng, inst.support_x.n(), 4));
            }
            inst.spec.length_sq = default_length_sq(inst.support_x.d());
            const GPModel model = fit(inst.spec, 1e-12, inst.support_x, inst.support_y);
            const Posterior post = predict(model, inst.support_x);
            observe(r, gpfs::max_abs_diff(post.mean, inst.support_y), s);
        } catch (const Error& e) {
            observe_error(r, e, s);
        }
        ++r.checked;
    }
    return r;
}

PropertyResult check_prior_recovery(std::uint64_t seed, double tol) {
    PropertyResult r = make_result("prior_recovery", tol);
    Rng rng(seed);
    const std::size_t d = 4;
    const KernelSpec spec{KernelFamily::SquaredExponential, 1.0, default_length_sq(d), 1.0};
    const FeatureSet query(gaussian_matrix(rng, 6, d));

    // Empty support: the oracle returns the prior itself.
    const Posterior prior = naive_condition(spec, 0.01, FeatureSet(Matrix(0, d)), Matrix(0, 2), query);
    double dev = 0.0;
    for (double v : prior.mean.data()) dev = std::max(dev, std::abs(v));
    dev = std::max(dev, gpfs::max_abs_diff(*prior.full_cov, gram(spec, query, query)));
    observe(r, dev, seed);
    ++r.checked;

    // fit() refuses an empty support.
    try {
        (void)fit(spec, 0.01, FeatureSet(Matrix(0, d)), Matrix(0, 1));
        observe(r, 1.0, seed);
    } catch (const Error& e) {
        observe(r, e.kind() == ErrorKind::EmptySupport ? 0.0 : 1.0, seed);
    }
    ++r.checked;

    // One support point at the origin; queries shifted to squared distance ≥ 100ℓ² from it.
    const GPModel model = fit(spec, 0.01, FeatureSet(Matrix(1, d, 0.0)), Matrix{{1.0}});
    for (double factor : {100.0, 400.0, 1600.0}) {
        const double offset = std::sqrt(factor * spec.length_sq);
        Matrix shifted = query.matrix();
        for (std::size_t j = 0; j < shifted.rows(); ++j) {
            for (std::size_t k = 0; k < d; ++k) shifted(j, k) = offset + 0.1 * query.row(j)[k];
        }
        const Posterior post = predict(model, FeatureSet(shifted));
        double worst = 0.0;
        for (std::size_t j = 0; j < post.variance.size(); ++j) {
            worst = std::max(worst, std::abs(post.variance[j] - spec.sigma_f_sq));
            worst = std::max(worst, std::abs(post.mean(j, 0)));
        }
        observe(r, worst, seed);
        ++r.checked;
    }
    return r;
}

std::vector<PropertyResult> run_suite(std::size_t instances, std::uint64_t seed) {
    return {
        check_oracle_equivalence(instances, derive_seed(seed, 100)),
        check_ridge_equivalence(instances, derive_seed(seed, 101)),
        check_variance_monotonicity(instances, derive_seed(seed, 102)),
        check_support_permutation(instances, derive_seed(seed, 103)),
        check_query_permutation(instances, derive_seed(seed, 104)),
        check_interpolation(instances, derive_seed(seed, 105)),
        check_prior_recovery(derive_seed(seed, 106)),
    };
}

}  // namespace gpfs::verify
