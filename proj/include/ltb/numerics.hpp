#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltb {

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct ToleranceNotMet : std::runtime_error {
    double best_estimate;
    double error_estimate;
    ToleranceNotMet(double best, double err)
        : std::runtime_error("quadrature tolerance not met (depth exhausted)"),
          best_estimate(best), error_estimate(err) {}
};

struct BracketError : std::invalid_argument {
    explicit BracketError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown by pointwise evaluations when an input leaves the admissible domain.
struct EvaluationError : std::domain_error {
    explicit EvaluationError(const std::string& what) : std::domain_error(what) {}
};

// ---------------------------------------------------------------------------
// Adaptive quadrature (nested Gauss-Kronrod 7/15, recursive bisection)
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    int max_depth = 60;

    void validate() const {
        if (!(abs_tol > 0) || !(rel_tol >= 0) || max_depth < 1)
            throw std::invalid_argument("QuadratureSpec: abs_tol > 0, rel_tol >= 0, max_depth >= 1 required");
    }
};

namespace detail {

// G7/K15 nodes and weights on [-1,1]; columns: node, Gauss weight, Kronrod weight.
inline constexpr double gk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
double gk15_panel(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double hl  = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7  = gk15[0][1] * f0;
    double k15 = gk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = hl * gk15[i][0];
        const double fv = f(mid + dx) + f(mid - dx);
        g7  += gk15[i][1] * fv;
        k15 += gk15[i][2] * fv;
    }
    g7 *= hl;
    k15 *= hl;
    err = std::abs(k15 - g7);
    return k15;
}

template <class F>
void quad_recurse(const F& f, double a, double b, double tol, int depth, int max_depth,
                  double& sum, double& err_sum, bool& ok) {
    double err = 0.0;
    const double v = gk15_panel(f, a, b, err);
    if (err <= tol || depth >= max_depth) {
        sum += v;
        err_sum += err;
        if (err > tol) ok = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    quad_recurse(f, a, mid, 0.5 * tol, depth + 1, max_depth, sum, err_sum, ok);
    quad_recurse(f, mid, b, 0.5 * tol, depth + 1, max_depth, sum, err_sum, ok);
}

} // namespace detail

// Oriented integral of f over [a,b]. integrate_adaptive(f,a,b) == -integrate_adaptive(f,b,a)
// exactly, since reversed limits reuse the same panel evaluations with a flipped sign.
template <class F>
double integrate_adaptive(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (a == b) return 0.0;
    const double sign = (a <= b) ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);

    double rough_err = 0.0;
    const double rough = detail::gk15_panel(f, lo, hi, rough_err);
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(rough));

    double sum = 0.0, err_sum = 0.0;
    bool ok = true;
    detail::quad_recurse(f, lo, hi, tol, 0, spec.max_depth, sum, err_sum, ok);
    if (!ok) throw ToleranceNotMet(sign * sum, err_sum);
    return sign * sum;
}

// ---------------------------------------------------------------------------
// Bracketed root finding (Brent)
// ---------------------------------------------------------------------------

template <class F>
double find_root_bracketed(const F& f, double lo, double hi, double tol = 1e-12) {
    if (!(tol > 0)) throw std::invalid_argument("find_root_bracketed: tol must be positive");
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("find_root_bracketed: bracket invalid (no sign change)");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol * 1e-3) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    return b;
}

// Expand [lo,hi] to the right by doubling until f changes sign. Returns the bracket.
template <class F>
std::pair<double, double> expand_bracket_right(const F& f, double lo, double hi, double cap = 1e9) {
    double flo = f(lo);
    double fhi = f(hi);
    while (flo * fhi > 0.0) {
        if (hi >= cap) throw BracketError("expand_bracket_right: no sign change below cap");
        lo = hi; flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Adaptive explicit IVP solver: Dormand-Prince 5(4) with dense output + events
// ---------------------------------------------------------------------------

struct IvpSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 1e-4;
    double min_step = 1e-14;
    double max_step = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(min_step > 0) || !(min_step <= initial_step) || !(initial_step <= max_step))
            throw std::invalid_argument("IvpSpec: need 0 < min_step <= initial_step <= max_step");
        if (!(rel_tol > 0) || !(abs_tol > 0))
            throw std::invalid_argument("IvpSpec: tolerances must be positive");
    }
};

enum class EventDirection { rising, falling, any };

template <std::size_t N>
struct EventSpec {
    std::function<double(double, const std::array<double, N>&)> event_function;
    EventDirection direction = EventDirection::any;
    bool terminal = false;
    double tol = 1e-10;
};

enum class IvpStatus { reached_end, terminal_event, step_underflow };

template <std::size_t N>
struct EventRecord {
    std::size_t event_index;     // index into the events list passed to solve_ivp
    double z;
    std::array<double, N> state;
};

template <std::size_t N>
struct Trajectory {
    using State = std::array<double, N>;
    struct Node {
        double z;
        State y;
        State dy;
    };
    std::vector<Node> nodes;
    std::vector<EventRecord<N>> events;
    IvpStatus status = IvpStatus::reached_end;

    double z_begin() const { return nodes.front().z; }
    double z_end() const { return nodes.back().z; }

    // Cubic Hermite interpolation on the step containing z.
    State eval(double z) const {
        if (nodes.size() == 1) return nodes.front().y;
        const bool fwd = nodes.back().z >= nodes.front().z;
        std::size_t lo = 0, hi = nodes.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (fwd ? (nodes[mid].z <= z) : (nodes[mid].z >= z)) lo = mid; else hi = mid;
        }
        const Node& n0 = nodes[lo];
        const Node& n1 = nodes[hi];
        const double h = n1.z - n0.z;
        if (h == 0.0) return n0.y;
        const double s = (z - n0.z) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        State out{};
        for (std::size_t i = 0; i < N; ++i)
            out[i] = h00 * n0.y[i] + h10 * h * n0.dy[i] + h01 * n1.y[i] + h11 * h * n1.dy[i];
        return out;
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace detail

// Integrates y' = rhs(z, y) from z0 to z1 (either direction). Local error is kept below
// abs_tol + rel_tol*|y| per step. Events are located on the dense output to their own
// tolerance; a terminal event truncates the trajectory at the located point.
// If the right-hand side throws EvaluationError, the step is retried with a smaller h;
// persistent failure or error-control failure at min_step ends with step_underflow
// ("stiff/singular" diagnostic) carrying the last valid state.
template <std::size_t N, class RHS>
Trajectory<N> solve_ivp(const RHS& rhs, std::array<double, N> y0, double z0, double z1,
                        const IvpSpec& spec = {}, const std::vector<EventSpec<N>>& events = {}) {
    spec.validate();
    using State = std::array<double, N>;
    Trajectory<N> traj;

    const double dir = (z1 >= z0) ? 1.0 : -1.0;
    const double span = std::abs(z1 - z0);
    if (span == 0.0) {
        traj.nodes.push_back({z0, y0, rhs(z0, y0)});
        return traj;
    }

    auto err_norm = [&](const State& y, const State& ynew, const State& e) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = spec.abs_tol + spec.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = e[i] / sc;
            s += r * r;
        }
        return std::sqrt(s / N);
    };

    double z = z0;
    State y = y0;
    State f = rhs(z, y);
    traj.nodes.push_back({z, y, f});

    std::vector<double> gprev(events.size());
    for (std::size_t j = 0; j < events.size(); ++j) gprev[j] = events[j].event_function(z, y);

    double h = std::min(spec.initial_step, std::min(spec.max_step, span));

    while (dir * (z1 - z) > 0) {
        h = std::min(h, std::abs(z1 - z));
        bool accepted = false;
        State ynew{}, fnew{}, k[7];
        double znew = z;

        while (!accepted) {
            if (h < spec.min_step) {
                traj.status = IvpStatus::step_underflow;
                return traj;
            }
            const double hs = dir * h;
            bool eval_failed = false;
            k[0] = f;
            State ytmp{};
            for (int st = 1; st < 7 && !eval_failed; ++st) {
                for (std::size_t i = 0; i < N; ++i) {
                    double acc = 0.0;
                    for (int m = 0; m < st; ++m) acc += detail::dp_a[st][m] * k[m][i];
                    ytmp[i] = y[i] + hs * acc;
                }
                try {
                    k[st] = rhs(z + detail::dp_c[st] * hs, ytmp);
                } catch (const EvaluationError&) {
                    eval_failed = true;
                }
            }
            if (eval_failed) {
                h *= 0.25;
                continue;
            }
            State e{};
            for (std::size_t i = 0; i < N; ++i) {
                double y5 = 0.0, y4 = 0.0;
                for (int m = 0; m < 7; ++m) {
                    y5 += detail::dp_b5[m] * k[m][i];
                    y4 += detail::dp_b4[m] * k[m][i];
                }
                ynew[i] = y[i] + hs * y5;
                e[i] = hs * (y5 - y4);
            }
            const double err = err_norm(y, ynew, e);
            if (err <= 1.0) {
                accepted = true;
                znew = z + hs;
                fnew = k[6]; // FSAL
                double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
                h = std::min(spec.max_step, h * std::min(5.0, std::max(0.2, fac)));
            } else {
                h *= std::min(0.9, std::max(0.2, 0.9 * std::pow(err, -0.2)));
            }
        }

        traj.nodes.push_back({znew, ynew, fnew});

        // event detection on the accepted step
        bool stop = false;
        double z_stop = znew;
        std::size_t stop_idx = 0;
        std::vector<EventRecord<N>> found;
        for (std::size_t j = 0; j < events.size(); ++j) {
            const double g1 = events[j].event_function(znew, ynew);
            const double g0 = gprev[j];
            gprev[j] = g1;
            const bool crossed =
                (g0 < 0 && g1 >= 0 && events[j].direction != EventDirection::falling) ||
                (g0 > 0 && g1 <= 0 && events[j].direction != EventDirection::rising);
            if (!crossed) continue;
            const auto& ev = events[j];
            auto g_of_z = [&](double zz) { return ev.event_function(zz, traj.eval(zz)); };
            double ze;
            if (g1 == 0.0) ze = znew;
            else ze = find_root_bracketed(g_of_z, z, znew, ev.tol);
            found.push_back({j, ze, traj.eval(ze)});
            if (ev.terminal && (!stop || dir * (ze - z_stop) < 0)) {
                stop = true;
                z_stop = ze;
                stop_idx = found.size() - 1;
            }
        }
        if (!found.empty()) {
            for (auto& r : found)
                if (!stop || dir * (r.z - z_stop) <= 0) traj.events.push_back(r);
            if (stop) {
                // truncate at the terminal event
                State ye = traj.eval(z_stop);
                State fe;
                try {
                    fe = rhs(z_stop, ye);
                } catch (const EvaluationError&) {
                    fe = traj.nodes.back().dy;
                }
                traj.nodes.back() = {z_stop, ye, fe};
                traj.status = IvpStatus::terminal_event;
                (void)stop_idx;
                return traj;
            }
        }

        z = znew;
        y = ynew;
        f = fnew;
    }
    traj.status = IvpStatus::reached_end;
    return traj;
}

} // namespace ltb
