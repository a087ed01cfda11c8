#pragma once

// Vertex LMI certificates for the sampled-in-space closed loops.
//
// Parabolic: 4x4 quadratic form in (z, z_x, f, F_x), affine in a2, checked at a2 in {lo, hi}.
// Hyperbolic: 5x5 quadratic form in (z, z_x, z_t, f, F_x), affine in (phi, a2, b),
// checked at all eight vertices. A feasible certificate yields
//   ||z(t)||^2 <= e^{-2 delta t} ||z(0)||^2 + gamma / (2 delta).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/plant.hpp"
#include "ssc/sampling.hpp"
#include "ssc/sym_matrix.hpp"

namespace ssc {

/// Extended Wirtinger constant 4 Delta^2 / pi^2.
inline double wirtinger_factor(double spacing) {
    return 4.0 * spacing * spacing / (std::numbers::pi * std::numbers::pi);
}

/// Free tuning parameters of a certificate.
struct Tuning {
    double gain = 0.0;          ///< K
    double young_weight = 1.0;  ///< R-bar
    double decay_rate = 0.0;    ///< delta
    double beta1 = 1.0;
    double beta2 = 1.0;
    double cross_weight = 0.0;  ///< p (hyperbolic only)
};

/// Known coefficient bounds plus the sampling spacing bound Delta.
struct CertificateBounds {
    Order order = Order::Parabolic;
    double spacing = 0.0;
    double a1_lower = 0.0;
    Interval a2;
    Interval phi;
    std::optional<Interval> damping;

    bool operator==(const CertificateBounds&) const = default;
};

inline CertificateBounds certificate_bounds(const PlantSpec& plant, const ActuationPartition& partition) {
    CertificateBounds b;
    b.order = plant.order();
    b.spacing = partition.delta();
    b.a1_lower = plant.a1().bounds().lo;
    b.a2 = plant.a2().bounds();
    b.phi = plant.phi().bounds();
    if (plant.b()) {
        if (!(plant.b()->bounds().lo > 0.0))
            throw ArgumentError("plant '" + plant.name() + "' has nonpositive damping bound; no certificate applies");
        b.damping = plant.b()->bounds();
    }
    return b;
}

struct ParabolicLmiParams {
    Tuning tuning;
    double spacing;
    double a1_lower;
    double phi_upper;
    Interval a2;

    void validate() const {
        if (!(tuning.gain >= 0.0)) throw ArgumentError("K must be >= 0");
        if (!(tuning.young_weight > 0.0 && tuning.beta1 > 0.0 && tuning.beta2 > 0.0 && tuning.decay_rate > 0.0))
            throw ArgumentError("R, beta1, beta2 and delta must be > 0");
        if (!(spacing > 0.0 && a1_lower > 0.0)) throw ArgumentError("Delta and a1 lower bound must be > 0");
        if (a2.lo > a2.hi) throw ArgumentError("a2 bounds reversed");
    }
};

struct HyperbolicLmiParams {
    Tuning tuning;
    double spacing;
    double a1_lower;
    Interval phi;
    Interval a2;
    Interval damping;

    void validate() const {
        if (!(tuning.gain >= 0.0)) throw ArgumentError("K must be >= 0");
        if (!(tuning.young_weight > 0.0 && tuning.beta1 > 0.0 && tuning.beta2 > 0.0 && tuning.decay_rate > 0.0))
            throw ArgumentError("R, beta1, beta2 and delta must be > 0");
        if (!(std::abs(tuning.cross_weight) < 0.5)) throw ArgumentError("p must lie in (-0.5, 0.5)");
        if (!(spacing > 0.0 && a1_lower > 0.0)) throw ArgumentError("Delta and a1 lower bound must be > 0");
        if (!(damping.lo > 0.0)) throw ArgumentError("damping lower bound must be > 0");
        if (phi.lo > phi.hi || a2.lo > a2.hi || damping.lo > damping.hi) throw ArgumentError("bounds reversed");
    }
};

inline ParabolicLmiParams parabolic_params(const Tuning& t, const CertificateBounds& b) {
    return {t, b.spacing, b.a1_lower, b.phi.hi, b.a2};
}

inline HyperbolicLmiParams hyperbolic_params(const Tuning& t, const CertificateBounds& b) {
    if (!b.damping) throw ArgumentError("hyperbolic certificate needs damping bounds");
    return {t, b.spacing, b.a1_lower, b.phi, b.a2, *b.damping};
}

inline SymMatrix<4> build_psi_parabolic(const ParabolicLmiParams& p, double a2) {
    const auto& t = p.tuning;
    const double K = t.gain, R = t.young_weight;
    const double c = wirtinger_factor(p.spacing) * K / R;
    SymMatrix<4> m;
    m.set(0, 0, -2.0 * K + 2.0 * p.phi_upper + 2.0 * t.decay_rate + K * R);
    m.set(0, 1, a2);
    m.set(0, 2, 1.0);
    m.set(0, 3, 0.0);
    m.set(1, 1, -2.0 * p.a1_lower + c);
    m.set(1, 2, 0.0);
    m.set(1, 3, -c);
    m.set(2, 2, -t.beta1);
    m.set(2, 3, 0.0);
    m.set(3, 3, -t.beta2 + c);
    return m;
}

inline SymMatrix<5> build_psi_hyperbolic(const HyperbolicLmiParams& p, double phi, double a2, double b) {
    const auto& t = p.tuning;
    const double K = t.gain, R = t.young_weight, q = t.cross_weight;
    const double c = wirtinger_factor(p.spacing) * K / R;
    SymMatrix<5> m;
    m.set(0, 0, -0.5 * q * (K - p.phi.hi) + 0.25 * K * R * q * q + 2.0 * t.decay_rate);
    m.set(0, 1, 0.5 * q * a2);
    m.set(0, 2, 1.0 - 0.5 * q * b - K + phi + K * R * q);
    m.set(0, 3, 0.5 * q);
    m.set(0, 4, 0.0);
    m.set(1, 1, -q * p.a1_lower + c);
    m.set(1, 2, a2);
    m.set(1, 3, 0.0);
    m.set(1, 4, -c);
    m.set(2, 2, 0.5 * q - 2.0 * p.damping.lo + 0.5 * K * R);
    m.set(2, 3, 1.0);
    m.set(2, 4, 0.0);
    m.set(3, 3, -t.beta1);
    m.set(3, 4, 0.0);
    m.set(4, 4, -t.beta2 + c);
    return m;
}

struct VertexVerdict {
    double phi;
    double a2;
    double b;  ///< NaN for parabolic vertices
    double lambda_max;
};

struct LmiCertificate {
    Tuning tuning;
    CertificateBounds bounds;
    std::vector<VertexVerdict> vertices;
    bool feasible = false;
    double gamma = 0.0;
    double bound = 0.0;  ///< gamma / (2 delta)

    double worst_lambda() const {
        double w = -std::numeric_limits<double>::infinity();
        for (const auto& v : vertices) w = std::max(w, v.lambda_max);
        return w;
    }
};

/// Feasibility tolerance on the vertex eigenvalues.
inline constexpr double kDefaultLmiTolerance = 1e-8;

namespace detail {
inline std::vector<double> vertex_values(Interval iv) {
    if (iv.lo == iv.hi) return {iv.lo};
    return {iv.lo, iv.hi};
}

inline CertificateBounds bounds_of(const ParabolicLmiParams& p) {
    CertificateBounds b;
    b.order = Order::Parabolic;
    b.spacing = p.spacing;
    b.a1_lower = p.a1_lower;
    b.a2 = p.a2;
    b.phi = {-std::numeric_limits<double>::infinity(), p.phi_upper};
    return b;
}
}  // namespace detail

inline double gamma_bound(double beta1, double beta2, double f_sq_integral_sup, double fx_shape_sq_integral_sup) {
    if (beta1 < 0.0 || beta2 < 0.0 || f_sq_integral_sup < 0.0 || fx_shape_sq_integral_sup < 0.0)
        throw ArgumentError("gamma_bound inputs must be >= 0");
    return beta1 * f_sq_integral_sup + beta2 * fx_shape_sq_integral_sup;
}

/// V0 e^{-2 delta t} + gamma / (2 delta).
inline double decay_bound(double v0, double delta, double gamma, double t) {
    if (!(delta > 0.0)) throw ArgumentError("decay_bound requires delta > 0");
    if (v0 < 0.0 || gamma < 0.0 || t < 0.0) throw ArgumentError("decay_bound requires V0, gamma, t >= 0");
    return v0 * std::exp(-2.0 * delta * t) + gamma / (2.0 * delta);
}

inline void attach_gamma(LmiCertificate& cert, double f_sq_sup, double fx_sq_sup) {
    cert.gamma = gamma_bound(cert.tuning.beta1, cert.tuning.beta2, f_sq_sup, fx_sq_sup);
    cert.bound = cert.gamma / (2.0 * cert.tuning.decay_rate);
}

inline LmiCertificate check_theorem1(const ParabolicLmiParams& p, double tol = kDefaultLmiTolerance) {
    p.validate();
    LmiCertificate cert;
    cert.tuning = p.tuning;
    cert.bounds = detail::bounds_of(p);
    cert.feasible = true;
    for (double a2 : detail::vertex_values(p.a2)) {
        const auto verdict = is_negative_semidefinite(build_psi_parabolic(p, a2), tol);
        cert.vertices.push_back({p.phi_upper, a2, std::numeric_limits<double>::quiet_NaN(), verdict.lambda_max});
        cert.feasible = cert.feasible && verdict.negative_semidefinite;
    }
    return cert;
}

inline LmiCertificate check_theorem2(const HyperbolicLmiParams& p, double tol = kDefaultLmiTolerance) {
    p.validate();
    LmiCertificate cert;
    cert.tuning = p.tuning;
    cert.bounds.order = Order::Hyperbolic;
    cert.bounds.spacing = p.spacing;
    cert.bounds.a1_lower = p.a1_lower;
    cert.bounds.a2 = p.a2;
    cert.bounds.phi = p.phi;
    cert.bounds.damping = p.damping;
    cert.feasible = true;
    for (double phi : detail::vertex_values(p.phi))
        for (double a2 : detail::vertex_values(p.a2))
            for (double b : detail::vertex_values(p.damping)) {
                const auto verdict = is_negative_semidefinite(build_psi_hyperbolic(p, phi, a2, b), tol);
                cert.vertices.push_back({phi, a2, b, verdict.lambda_max});
                cert.feasible = cert.feasible && verdict.negative_semidefinite;
            }
    return cert;
}

/// Runs the certificate matching `bounds.order`; the parabolic certificate keeps the full phi interval.
inline LmiCertificate check_certificate(const Tuning& t, const CertificateBounds& bounds,
                                        double tol = kDefaultLmiTolerance) {
    LmiCertificate cert = bounds.order == Order::Parabolic ? check_theorem1(parabolic_params(t, bounds), tol)
                                                           : check_theorem2(hyperbolic_params(t, bounds), tol);
    cert.bounds = bounds;
    return cert;
}

// ---------------------------------------------------------------------------
// Grid search

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n == 0) throw ArgumentError("grid needs at least one point");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > 0.0)) throw ArgumentError("log grid bounds must be > 0");
    auto e = linear_grid(std::log10(lo), std::log10(hi), n);
    for (auto& x : e) x = std::pow(10.0, x);
    if (n > 1) {
        e.front() = lo;
        e.back() = hi;
    }
    return e;
}

struct SearchGrids {
    std::vector<double> gain{100.0};
    std::vector<double> young_weight = log_grid(1e-3, 1e2, 61);
    std::vector<double> decay_rate = log_grid(1e-3, 1e2, 41);
    std::vector<double> beta1 = log_grid(1e-2, 1e3, 11);
    std::vector<double> beta2 = log_grid(1e-2, 1e3, 11);
    std::vector<double> cross_weight = linear_grid(0.05, 0.45, 9);
};

struct SearchProblem {
    CertificateBounds bounds;
    SearchGrids grids;
    double tolerance = kDefaultLmiTolerance;
    double f_sq_sup = 0.0;   ///< sup_t int f^2 dx
    double fx_sq_sup = 0.0;  ///< sup_t sum_j int (F_x^j)^2 dx
};

struct SearchResult {
    std::optional<LmiCertificate> best;  ///< feasible point minimizing gamma / (2 delta)
    LmiCertificate least_violating;      ///< smallest worst-vertex eigenvalue over the grid
    std::size_t scanned = 0;
    std::size_t feasible_count = 0;

    bool feasible() const { return best.has_value(); }
};

/// Worker count for sweeps; PDE_SSC_THREADS caps it.
inline unsigned default_thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PDE_SSC_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

namespace detail {

struct ScanBest {
    std::optional<LmiCertificate> best;
    std::size_t best_index = 0;
    std::optional<LmiCertificate> least;
    std::size_t least_index = 0;
    std::size_t feasible_count = 0;
};

/// Feasible candidates order by (bound, -delta, scan index).
inline bool better_feasible(const LmiCertificate& a, std::size_t ia, const LmiCertificate& b, std::size_t ib) {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.tuning.decay_rate != b.tuning.decay_rate) return a.tuning.decay_rate > b.tuning.decay_rate;
    return ia < ib;
}

inline void merge(ScanBest& into, const ScanBest& other) {
    into.feasible_count += other.feasible_count;
    if (other.best && (!into.best || better_feasible(*other.best, other.best_index, *into.best, into.best_index))) {
        into.best = other.best;
        into.best_index = other.best_index;
    }
    if (other.least) {
        const double a = other.least->worst_lambda(), b = into.least ? into.least->worst_lambda() : 0.0;
        if (!into.least || a < b || (a == b && other.least_index < into.least_index)) {
            into.least = other.least;
            into.least_index = other.least_index;
        }
    }
}

}  // namespace detail

/// Exhaustive scan over the tuning grids in a fixed nesting order
/// (K, R, delta, beta1, beta2, p). The result is independent of the worker count.
inline SearchResult search_feasible(const SearchProblem& problem, unsigned threads = default_thread_count()) {
    const auto& g = problem.grids;
    const bool hyper = problem.bounds.order == Order::Hyperbolic;
    const std::vector<double> no_p{0.0};
    const auto& ps = hyper ? g.cross_weight : no_p;
    const std::size_t dims[6] = {g.gain.size(), g.young_weight.size(), g.decay_rate.size(),
                                 g.beta1.size(), g.beta2.size(),       ps.size()};
    std::size_t total = 1;
    for (auto d : dims) {
        if (d == 0) throw ArgumentError("search grids must be nonempty");
        total *= d;
    }

    auto tuning_at = [&](std::size_t idx) {
        std::size_t k[6];
        for (int d = 5; d >= 0; --d) {
            k[d] = idx % dims[d];
            idx /= dims[d];
        }
        return Tuning{g.gain[k[0]], g.young_weight[k[1]], g.decay_rate[k[2]], g.beta1[k[3]], g.beta2[k[4]], ps[k[5]]};
    };

    auto scan = [&](std::size_t begin, std::size_t end) {
        detail::ScanBest local;
        for (std::size_t i = begin; i < end; ++i) {
            auto cert = check_certificate(tuning_at(i), problem.bounds, problem.tolerance);
            attach_gamma(cert, problem.f_sq_sup, problem.fx_sq_sup);
            if (cert.feasible) {
                ++local.feasible_count;
                if (!local.best || detail::better_feasible(cert, i, *local.best, local.best_index)) {
                    local.best = cert;
                    local.best_index = i;
                }
            }
            if (!local.least || cert.worst_lambda() < local.least->worst_lambda()) {
                local.least = std::move(cert);
                local.least_index = i;
            }
        }
        return local;
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(total, 64))));
    std::vector<detail::ScanBest> parts(threads);
    if (threads == 1) {
        parts[0] = scan(0, total);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = total * w / threads, end = total * (w + 1) / threads;
            pool.emplace_back([&, w, begin, end] { parts[w] = scan(begin, end); });
        }
        for (auto& th : pool) th.join();
    }

    detail::ScanBest all;
    for (const auto& part : parts) detail::merge(all, part);

    SearchResult result;
    result.best = std::move(all.best);
    result.least_violating = std::move(*all.least);
    result.scanned = total;
    result.feasible_count = all.feasible_count;
    return result;
}

}  // namespace ssc
