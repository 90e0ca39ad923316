#include "gpem/fekete.hpp"

#include <boost/math/tools/roots.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gpem {

namespace {

double weight(const Eigen::VectorXd& z, const FieldParams& p) {
    return static_cast<double>(z.size()) / p.t;
}

double sep(double a, double b) { return std::max(std::abs(a - b), kMinSeparation); }

// signed difference with the separation floor applied to its magnitude
double sdiff(double a, double b) {
    const double d = a - b;
    return std::abs(d) >= kMinSeparation ? d : std::copysign(kMinSeparation, d);
}

int nthreads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace

double fekete_energy_serial(const Eigen::VectorXd& z, const FieldParams& p) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    double e = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        e += w * phi(p, z[i]);
        for (Eigen::Index j = i + 1; j < n; ++j) e -= std::log(sep(z[i], z[j]));
    }
    return e;
}

Eigen::VectorXd fekete_gradient_serial(const Eigen::VectorXd& z, const FieldParams& p) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = w * dphi(p, z[i]);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) s -= 1.0 / sdiff(z[i], z[j]);
        g[i] = s;
    }
    return g;
}

Eigen::MatrixXd fekete_hessian_serial(const Eigen::VectorXd& z, const FieldParams& p) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = w * d2phi(p, z[i]);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double r = sep(z[i], z[j]);
            H(i, j) = -1.0 / (r * r);
            d += 1.0 / (r * r);
        }
        H(i, i) = d;
    }
    return H;
}

double fekete_energy(const Eigen::VectorXd& z, const FieldParams& p, int threads) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    double e = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : e) num_threads(nthreads(threads))
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = w * phi(p, z[i]);
        for (Eigen::Index j = i + 1; j < n; ++j) s -= std::log(sep(z[i], z[j]));
        e += s;
    }
    return e;
}

Eigen::VectorXd fekete_gradient(const Eigen::VectorXd& z, const FieldParams& p, int threads) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    Eigen::VectorXd g(n);
#pragma omp parallel for schedule(static) num_threads(nthreads(threads))
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = w * dphi(p, z[i]);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) s -= 1.0 / sdiff(z[i], z[j]);
        g[i] = s;
    }
    return g;
}

Eigen::MatrixXd fekete_hessian(const Eigen::VectorXd& z, const FieldParams& p, int threads) {
    const Eigen::Index n = z.size();
    const double w = weight(z, p);
    Eigen::MatrixXd H(n, n);
#pragma omp parallel for schedule(static) num_threads(nthreads(threads))
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = w * d2phi(p, z[i]);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double r = sep(z[i], z[j]);
            H(i, j) = -1.0 / (r * r);
            d += 1.0 / (r * r);
        }
        H(i, i) = d;
    }
    return H;
}

std::vector<double> fekete_initial(int n, const FieldParams& p, std::uint64_t seed) {
    std::vector<double> z(n);
    bool done = false;
    try {
        const SolveReport r = solve_at(p);
        const double lo = support_left(r.config), hi = support_right(r.config);
        double prev = lo;
        for (int i = 0; i < n; ++i) {
            const double target = p.t * (i + 0.5) / n;
            auto f = [&](double x) { return partial_mass(r.config, p, x) - target; };
            boost::uintmax_t it = 100;
            const auto br = boost::math::tools::toms748_solve(
                f, prev, hi, [](double a, double b) { return std::abs(b - a) < 1e-12 * (1 + std::abs(a)); },
                it);
            z[i] = prev = 0.5 * (br.first + br.second);
        }
        done = true;
    } catch (const std::exception&) {
    }
    if (!done) {
        const auto yp = critical_points(p).second;
        const double L = (yp.imag() == 0.0 ? std::max(yp.real(), 0.0) : 0.0) + 2.0;
        for (int i = 0; i < n; ++i) z[i] = L * (i + 0.5) / n;
    }
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        for (int i = 0; i < n; ++i) {
            const double gap = i + 1 < n ? z[i + 1] - z[i] : z[i] - z[i - 1];
            z[i] = std::max(0.0, z[i] + u(rng) * gap);
        }
        std::sort(z.begin(), z.end());
    }
    return z;
}

namespace {

bool ordered(const Eigen::VectorXd& z) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0) return false;
        if (i > 0 && !(z[i] - z[i - 1] > kMinSeparation)) return false;
    }
    return true;
}

// gradient with bound-constrained components (z = 0 pushed outward) zeroed
Eigen::VectorXd projected(const Eigen::VectorXd& z, const Eigen::VectorXd& g) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z[i] <= 0.0 && g[i] > 0.0) pg[i] = 0.0;
    return pg;
}

}  // namespace

ParticleConfig minimize_energy(int n, const FieldParams& p, std::uint64_t seed,
                               const FeketeOptions& o) {
    if (n < 8) throw InvalidArgument("need at least 8 particles");
    validate(p);
    const std::vector<double> z0 = fekete_initial(n, p, seed);
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(z0.data(), n);
    const double w = weight(z, p);
    ParticleConfig out;
    double E = fekete_energy(z, p, o.threads);
    out.energy_history.push_back(E);

    // coordinate Newton sweeps, each move kept inside its neighbours' midpoints
    for (int s = 0; s < o.sweeps; ++s) {
        for (int i = 0; i < n; ++i) {
            double g = w * dphi(p, z[i]), h = w * d2phi(p, z[i]);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d = sdiff(z[i], z[j]);
                g -= 1.0 / d;
                h += 1.0 / (d * d);
            }
            if (!(h > 0.0)) continue;
            const double lo = i > 0 ? 0.5 * (z[i - 1] + z[i]) : 0.0;
            const double hi = i + 1 < n ? 0.5 * (z[i] + z[i + 1]) : z[i] + 1.0 + std::abs(g / h);
            z[i] = std::clamp(z[i] - g / h, lo, hi);
        }
        const double En = fekete_energy(z, p, o.threads);
        if (En > E) break;  // sweeps are a warm start only
        E = En;
        out.energy_history.push_back(E);
    }

    int it = 0;
    for (; it < o.max_iter; ++it) {
        const Eigen::VectorXd g = fekete_gradient(z, p, o.threads);
        const Eigen::VectorXd pg = projected(z, g);
        out.max_gradient = pg.cwiseAbs().maxCoeff();
        if (out.max_gradient < o.grad_tol) break;
        // Newton on the free variables
        std::vector<int> free;
        for (int i = 0; i < n; ++i)
            if (!(z[i] <= 0.0 && g[i] > 0.0)) free.push_back(i);
        const Eigen::MatrixXd H = fekete_hessian(z, p, o.threads);
        const int m = static_cast<int>(free.size());
        Eigen::MatrixXd Hf(m, m);
        Eigen::VectorXd gf(m);
        for (int a = 0; a < m; ++a) {
            gf[a] = g[free[a]];
            for (int b = 0; b < m; ++b) Hf(a, b) = H(free[a], free[b]);
        }
        Eigen::VectorXd df;
        double shift = 0.0;
        for (int k = 0; k < 60; ++k) {
            Eigen::LLT<Eigen::MatrixXd> llt(Hf + shift * Eigen::MatrixXd::Identity(m, m));
            if (llt.info() == Eigen::Success) {
                df = llt.solve(-gf);
                break;
            }
            shift = shift == 0.0 ? 1e-8 * Hf.diagonal().cwiseAbs().maxCoeff() : 4.0 * shift;
        }
        if (df.size() != m) df = -gf;
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < m; ++a) d[free[a]] = df[a];

        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            const Eigen::VectorXd zn = (z + alpha * d).cwiseMax(0.0);
            if (!ordered(zn)) continue;
            const double En = fekete_energy(zn, p, o.threads);
            bool ok = En <= E + 1e-4 * g.dot(zn - z);
            if (!ok && std::abs(En - E) <= 256.0 * std::numeric_limits<double>::epsilon() * std::abs(E)) {
                // energy differences are below roundoff: judge by the gradient
                const double gn =
                    projected(zn, fekete_gradient(zn, p, o.threads)).cwiseAbs().maxCoeff();
                ok = gn < out.max_gradient;
            }
            if (ok) {
                z = zn;
                E = std::min(E, En);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // no further decrease representable
        out.energy_history.push_back(E);
    }
    out.iterations = it;
    out.max_gradient = projected(z, fekete_gradient(z, p, o.threads)).cwiseAbs().maxCoeff();
    if (out.max_gradient >= o.grad_tol && it >= o.max_iter)
        throw SolveError(SolveError::Kind::MaxIterations, "Fekete minimization did not converge");
    out.points.assign(z.data(), z.data() + n);
    out.energy = E;
    return out;
}

double ks_distance(const std::vector<double>& points, const SupportConfig& cfg,
                   const FieldParams& p) {
    std::vector<double> z = points;
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double F = partial_mass(cfg, p, z[i]) / p.t;
        d = std::max({d, F - i / n, (i + 1) / n - F});
    }
    return d;
}

int count_in(const std::vector<double>& points, double lo, double hi) {
    return static_cast<int>(std::count_if(points.begin(), points.end(),
                                          [&](double x) { return x > lo && x < hi; }));
}

}  // namespace gpem
