#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace symdistill {

enum class ForceKind { Spring, InvR, InvR2, Charge };

struct ForceLaw {
    ForceKind kind = ForceKind::Spring;
    double softening = 1e-2;
};

inline ForceKind force_kind_from_name(std::string_view name)
{
    if (name == "spring") return ForceKind::Spring;
    if (name == "inv_r") return ForceKind::InvR;
    if (name == "inv_r2") return ForceKind::InvR2;
    if (name == "charge") return ForceKind::Charge;
    throw ConfigError("unknown force law '" + std::string(name) + "'");
}

// Force on the first particle, given the offset (dx, dy), the softened
// distance r and the second mass and both charges.
inline std::array<double, 2> pairwise_force(ForceKind kind, double dx, double dy, double r, double m2, double q1, double q2)
{
    double s = 0.0;
    switch (kind) {
    case ForceKind::Spring: s = (1.0 - r) / r; break;
    case ForceKind::InvR: s = 1.0 / (r * r); break;
    case ForceKind::InvR2: s = m2 / (r * r * r); break;
    case ForceKind::Charge: s = q1 * q2 / (r * r * r); break;
    }
    return {s * dx, s * dy};
}

// Inputs (dx, dy, r, m1, m2, q1, q2), outputs (fx, fy).
inline IOTable gen_pairwise(const ForceLaw& law, std::size_t n, Rng& rng)
{
    if (n < 1) throw ConfigError("need at least one sample");
    if (!(law.softening >= 0.0)) throw ConfigError("softening must be nonnegative");
    IOTable t;
    t.input_names = {"dx", "dy", "r", "m1", "m2", "q1", "q2"};
    t.output_names = {"fx", "fy"};
    t.x = Matrix(n, 7);
    t.y = Matrix(n, 2);
    auto charge = [&] {
        for (;;) {
            const double q = rng.uniform(-1.0, 1.0);
            if (std::abs(q) >= 0.1) return q;
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        double dx = 0.0;
        double dy = 0.0;
        double dist = 0.0;
        do {
            dx = rng.uniform(-5.0, 5.0);
            dy = rng.uniform(-5.0, 5.0);
            dist = std::sqrt(dx * dx + dy * dy);
        } while (dist < 0.1);
        const double r = dist + law.softening;
        const double m1 = rng.uniform(0.5, 2.0);
        const double m2 = rng.uniform(0.5, 2.0);
        const double q1 = charge();
        const double q2 = charge();
        const double row[7] = {dx, dy, r, m1, m2, q1, q2};
        for (std::size_t c = 0; c < 7; ++c) t.x(i, c) = row[c];
        const auto f = pairwise_force(law.kind, dx, dy, r, m2, q1, q2);
        t.y(i, 0) = f[0];
        t.y(i, 1) = f[1];
    }
    return t;
}

// u(x, t) = exp(-pi^2 alpha t) sin(pi x), the decaying first mode of the 1-D
// heat equation on [0, 1] with zero boundary values.
inline double heat_solution(double x, double t, double alpha)
{
    constexpr double pi = std::numbers::pi;
    return std::exp(-pi * pi * alpha * t) * std::sin(pi * x);
}

inline IOTable gen_heat(std::size_t n, double alpha, Rng& rng)
{
    if (n < 1) throw ConfigError("need at least one sample");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    IOTable t;
    t.input_names = {"x", "t"};
    t.output_names = {"u"};
    t.x = Matrix(n, 2);
    t.y = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform();
        const double time = rng.uniform();
        t.x(i, 0) = x;
        t.x(i, 1) = time;
        t.y(i, 0) = heat_solution(x, time, alpha);
    }
    return t;
}

} // namespace symdistill
