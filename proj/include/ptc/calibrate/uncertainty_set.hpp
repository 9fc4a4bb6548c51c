#pragma once

#include "ptc/solver/cholesky.hpp"

#include <string_view>

namespace ptc {

enum class SetKind { Box, Ellipsoid, NormBall };

inline std::string_view to_string(SetKind k) {
    switch (k) {
    case SetKind::Box: return "box";
    case SetKind::Ellipsoid: return "ellipsoid";
    case SetKind::NormBall: return "norm-ball";
    }
    return "?";
}

/**
 * A concrete uncertainty set for one covariate:
 *   Box        {c : lower <= c <= upper}
 *   Ellipsoid  {c : mahalanobis(c - center, factor) <= radius}
 *   NormBall   {c : ||c - center||_2 <= radius}
 */
struct UncertaintySet {
    SetKind kind = SetKind::Box;
    Vector lower;
    Vector upper;
    Vector center;
    PsdFactor factor;
    double radius = 0.0;

    static UncertaintySet box(Vector lo, Vector hi) {
        require(lo.size() == hi.size(), ErrorCode::DimensionMismatch, "box: bound lengths differ");
        require(((hi - lo).array() >= 0.0).all(), ErrorCode::DomainError, "box: lower exceeds upper");
        UncertaintySet s;
        s.kind = SetKind::Box;
        s.lower = std::move(lo);
        s.upper = std::move(hi);
        return s;
    }

    static UncertaintySet ellipsoid(Vector center, PsdFactor factor, double radius) {
        require_dims(factor.dim(), center.size(), "ellipsoid: factor dimension");
        require(radius >= 0.0, ErrorCode::DomainError, "ellipsoid: negative radius");
        UncertaintySet s;
        s.kind = SetKind::Ellipsoid;
        s.center = std::move(center);
        s.factor = std::move(factor);
        s.radius = radius;
        return s;
    }

    static UncertaintySet norm_ball(Vector center, double radius) {
        require(radius >= 0.0, ErrorCode::DomainError, "norm ball: negative radius");
        UncertaintySet s;
        s.kind = SetKind::NormBall;
        s.center = std::move(center);
        s.radius = radius;
        return s;
    }

    Index dim() const { return kind == SetKind::Box ? lower.size() : center.size(); }

    /// Box midpoint, or the center otherwise.
    Vector mid() const { return kind == SetKind::Box ? Vector(0.5 * (lower + upper)) : center; }

    /// Membership with a relative slack of 1e-9 on the set's scale.
    bool contains(const Vector& c) const {
        require_dims(c.size(), dim(), "contains: objective length");
        switch (kind) {
        case SetKind::Box:
            for (Index i = 0; i < c.size(); ++i) {
                const double tol = 1e-9 * 0.5 * (upper(i) - lower(i)) +
                                   1e-12 * std::max({1.0, std::abs(lower(i)), std::abs(upper(i))});
                if (!(c(i) >= lower(i) - tol && c(i) <= upper(i) + tol)) return false;
            }
            return true;
        case SetKind::Ellipsoid:
            return mahalanobis(c - center, factor) <= radius * (1.0 + 1e-9) + 1e-12;
        case SetKind::NormBall:
            return (c - center).norm() <= radius * (1.0 + 1e-9) + 1e-12;
        }
        return false;
    }

    /// Support function max_{c in set} c'x.
    double support(const Vector& x) const {
        require_dims(x.size(), dim(), "support: decision length");
        switch (kind) {
        case SetKind::Box: {
            double v = 0.0;
            for (Index i = 0; i < x.size(); ++i) {
                v += 0.5 * (lower(i) + upper(i)) * x(i) + 0.5 * (upper(i) - lower(i)) * std::abs(x(i));
            }
            return v;
        }
        case SetKind::Ellipsoid:
            return center.dot(x) + radius * (factor.lower.transpose() * x).norm();
        case SetKind::NormBall:
            return center.dot(x) + radius * x.norm();
        }
        return 0.0;
    }

    /// A maximizer of c'x over the set.
    Vector argmax(const Vector& x) const {
        require_dims(x.size(), dim(), "argmax: decision length");
        switch (kind) {
        case SetKind::Box: {
            Vector c(x.size());
            for (Index i = 0; i < x.size(); ++i) c(i) = x(i) >= 0.0 ? upper(i) : lower(i);
            return c;
        }
        case SetKind::Ellipsoid: {
            const Vector qx = factor.lower * (factor.lower.transpose() * x);
            const double norm = std::sqrt(std::max(x.dot(qx), 0.0));
            return norm > 0.0 ? Vector(center + radius * qx / norm) : center;
        }
        case SetKind::NormBall: {
            const double norm = x.norm();
            return norm > 0.0 ? Vector(center + radius * x / norm) : center;
        }
        }
        return {};
    }

    /// The reflected set {-c : c in set}.
    UncertaintySet negated() const {
        UncertaintySet s = *this;
        if (kind == SetKind::Box) {
            s.lower = -upper;
            s.upper = -lower;
        } else {
            s.center = -center;
        }
        return s;
    }
};

}  // namespace ptc
