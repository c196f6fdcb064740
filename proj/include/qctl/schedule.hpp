#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qctl {

// Instantaneous rotation of (r_y, r_z) by dtheta at time t. In a theta
// schedule this is a jump of the angle itself; in a u schedule it is the
// Dirac term with kappa * integral(u) = dtheta.
struct Impulse {
    double t = 0.0;
    double dtheta = 0.0;
};

// One smooth piece of a control signal on [t0, t1]: either a constant or a
// sampled function with local cubic interpolation.
struct Piece {
    enum class Kind { Constant, Samples };

    double t0 = 0.0;
    double t1 = 0.0;
    Kind kind = Kind::Constant;
    double value = 0.0;            // Kind::Constant
    std::vector<double> ts;        // Kind::Samples, increasing, spans [t0, t1]
    std::vector<double> vs;

    static Piece constant(double t0, double t1, double value) {
        Piece p;
        p.t0 = t0;
        p.t1 = t1;
        p.kind = Kind::Constant;
        p.value = value;
        return p;
    }

    static Piece samples(std::vector<double> ts, std::vector<double> vs) {
        if (ts.size() != vs.size() || ts.size() < 2)
            throw std::invalid_argument("Piece::samples: need >= 2 matching samples");
        Piece p;
        p.t0 = ts.front();
        p.t1 = ts.back();
        p.kind = Kind::Samples;
        p.ts = std::move(ts);
        p.vs = std::move(vs);
        return p;
    }

    // Catmull-Rom style cubic Hermite with three-point finite-difference
    // slopes on a possibly nonuniform grid; one-sided slopes at the ends.
    double eval(double t) const {
        if (kind == Kind::Constant) return value;
        const std::size_t n = ts.size();
        if (t <= ts.front()) return vs.front();
        if (t >= ts.back()) return vs.back();
        const std::size_t i =
            static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
        const double h = ts[i + 1] - ts[i];
        const double s = (t - ts[i]) / h;
        const double m0 = slope(i) * h;
        const double m1 = slope(i + 1) * h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2.0 * s3 - 3.0 * s2 + 1.0) * vs[i] + (s3 - 2.0 * s2 + s) * m0 +
               (-2.0 * s3 + 3.0 * s2) * vs[i + 1] + (s3 - s2) * m1;
    }

    // Exact derivative of the interpolant above.
    double eval_deriv(double t) const {
        if (kind == Kind::Constant) return 0.0;
        const std::size_t n = ts.size();
        std::size_t i;
        if (t <= ts.front()) {
            i = 0;
            t = ts.front();
        } else if (t >= ts.back()) {
            i = n - 2;
            t = ts.back();
        } else {
            i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) -
                1;
        }
        const double h = ts[i + 1] - ts[i];
        const double s = (t - ts[i]) / h;
        const double m0 = slope(i) * h;
        const double m1 = slope(i + 1) * h;
        const double s2 = s * s;
        return ((6.0 * s2 - 6.0 * s) * vs[i] + (3.0 * s2 - 4.0 * s + 1.0) * m0 +
                (-6.0 * s2 + 6.0 * s) * vs[i + 1] + (3.0 * s2 - 2.0 * s) * m1) /
               h;
    }

  private:
    double slope(std::size_t i) const {
        const std::size_t n = ts.size();
        if (i == 0) return (vs[1] - vs[0]) / (ts[1] - ts[0]);
        if (i == n - 1) return (vs[n - 1] - vs[n - 2]) / (ts[n - 1] - ts[n - 2]);
        const double hl = ts[i] - ts[i - 1];
        const double hr = ts[i + 1] - ts[i];
        const double dl = (vs[i] - vs[i - 1]) / hl;
        const double dr = (vs[i + 1] - vs[i]) / hr;
        return (dl * hr + dr * hl) / (hl + hr);
    }
};

// Impulse list plus a piecewise-smooth signal over [0, T]. The same container
// describes theta(t), v(t), or u(t) depending on context. Angles are stored
// unwrapped; reduce mod 2*pi only at comparison points.
struct ControlSchedule {
    double horizon = 0.0;
    std::vector<Impulse> impulses;
    std::vector<Piece> pieces;  // sorted, non-overlapping; gaps read as 0

    static ControlSchedule constant(double horizon, double value) {
        ControlSchedule s;
        s.horizon = horizon;
        if (horizon > 0.0) s.pieces.push_back(Piece::constant(0.0, horizon, value));
        return s;
    }

    // Smooth-part value at time t (impulses are events, not values).
    double eval(double t) const {
        for (const Piece& p : pieces) {
            if (t >= p.t0 && t <= p.t1) return p.eval(t);
        }
        // Exactly at a boundary shared by two pieces the earlier piece wins;
        // outside all pieces the signal reads 0.
        return 0.0;
    }

    void validate() const {
        if (!(horizon >= 0.0)) throw std::invalid_argument("ControlSchedule: horizon < 0");
        double prev = 0.0;
        for (const Impulse& im : impulses) {
            if (im.t < prev - 1e-15 || im.t < -1e-15 || im.t > horizon + 1e-15)
                throw std::invalid_argument("ControlSchedule: impulse times must be "
                                            "nondecreasing and within [0, T]");
            prev = im.t;
        }
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            const Piece& p = pieces[k];
            if (!(p.t1 >= p.t0)) throw std::invalid_argument("ControlSchedule: piece t1 < t0");
            if (k > 0 && p.t0 < pieces[k - 1].t1 - 1e-12)
                throw std::invalid_argument("ControlSchedule: overlapping pieces");
            if (p.kind == Piece::Kind::Samples) {
                for (std::size_t i = 1; i < p.ts.size(); ++i)
                    if (!(p.ts[i] > p.ts[i - 1]))
                        throw std::invalid_argument("ControlSchedule: sample times not increasing");
            }
        }
    }
};

// Reduces an angle to (-pi, pi].
inline double wrap_angle(double a) noexcept {
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}

}  // namespace qctl
