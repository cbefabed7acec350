/**
 * @file linear_operator.hpp
 * @brief The operator u^(2n) + a_{2n-1} u^(2n-1) + ... + a_1 u' + (a_0 + lambda) u.
 *
 * Coefficients are stored per segment. Each segment carries one piece per
 * coefficient, a piece being `sign * expr(offset + direction * t)`, so even and
 * odd extensions and reflections are represented exactly by composing affine
 * maps of the argument. Segment boundaries sit at integer multiples of the base
 * length T; the integrator never steps across them.
 *
 * The parameter `lambda` enters in two ways: it is added to a_0, and it is the
 * value bound to the identifier `lambda` inside coefficient expressions.
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/expr.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace greenkit {

struct CoefficientPiece {
    ExprAst expr;
    double offset = 0.0;
    double direction = 1.0; // orientation flag: +1 or -1
    double sign = 1.0;

    double value(double t, double lambda) const { return sign * expr.eval(offset + direction * t, lambda); }
};

struct Segment {
    double begin = 0.0;
    double end = 0.0;
    std::vector<CoefficientPiece> pieces; // one per coefficient, index k = derivative order
};

class LinearOperator {
public:
    /// Operator on [0, length] with coefficients a_0 ... a_{2n-1}.
    LinearOperator(int half_order, double length, std::vector<ExprAst> coefficients)
        : half_order_(half_order), base_length_(length), length_(length) {
        if (half_order < 1) throw ConfigError("half order must be at least 1");
        if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("interval length must be positive");
        if (coefficients.size() != static_cast<std::size_t>(2 * half_order))
            throw ConfigError("expected " + std::to_string(2 * half_order) + " coefficients, got " +
                              std::to_string(coefficients.size()));
        Segment seg{0.0, length, {}};
        for (auto& c : coefficients) seg.pieces.push_back(CoefficientPiece{std::move(c)});
        segments_.push_back(std::move(seg));
    }

    /// Convenience: all coefficients zero except the listed ones (parsed).
    static LinearOperator from_strings(int half_order, double length, const std::vector<std::string>& exprs) {
        std::vector<ExprAst> parsed;
        parsed.reserve(exprs.size());
        for (const auto& e : exprs) parsed.push_back(parse_expression(e));
        return LinearOperator(half_order, length, std::move(parsed));
    }

    int half_order() const noexcept { return half_order_; }
    int order() const noexcept { return 2 * half_order_; }
    double length() const noexcept { return length_; }
    /// The T of the operator this one was extended from.
    double base_length() const noexcept { return base_length_; }
    double shift() const noexcept { return shift_; }
    std::span<const Segment> segments() const noexcept { return segments_; }

    std::vector<double> breakpoints() const {
        std::vector<double> out;
        out.reserve(segments_.size() + 1);
        for (const auto& s : segments_) out.push_back(s.begin);
        out.push_back(length_);
        return out;
    }

    /// Segment containing t, using [begin, end) except for the last one.
    std::size_t segment_index(double t) const {
        const double slack = 1e-12 * length_;
        if (!(t >= -slack && t <= length_ + slack))
            throw DomainError("t = " + std::to_string(t) + " outside [0, " + std::to_string(length_) + "]");
        for (std::size_t i = 0; i + 1 < segments_.size(); ++i)
            if (t < segments_[i].end) return i;
        return segments_.size() - 1;
    }

    /// a_k on a given segment, including lambda and the accumulated shift when k == 0.
    double coefficient_on(std::size_t segment, int k, double t, double lambda) const {
        const double lam = lambda + shift_;
        double v = segments_[segment].pieces[static_cast<std::size_t>(k)].value(t, lam);
        if (k == 0) v += lam;
        return v;
    }

    double coefficient(int k, double t, double lambda) const {
        if (k < 0 || k >= order()) throw DomainError("coefficient index " + std::to_string(k) + " out of range");
        return coefficient_on(segment_index(t), k, t, lambda);
    }

    friend LinearOperator shift_lambda(const LinearOperator& op, double lam) {
        LinearOperator out = op;
        out.shift_ += lam;
        return out;
    }

    friend LinearOperator extend_to_double(const LinearOperator& op) {
        LinearOperator out = op;
        const double len = op.length_;
        std::vector<Segment> mirrored;
        for (auto it = op.segments_.rbegin(); it != op.segments_.rend(); ++it)
            mirrored.push_back(op.mirror_segment(*it, 2.0 * len, /*odd_sign_flip=*/true));
        out.segments_.insert(out.segments_.end(), mirrored.begin(), mirrored.end());
        out.length_ = 2.0 * len;
        return out;
    }

    friend LinearOperator extend_to_quadruple(const LinearOperator& op) {
        return extend_to_double(extend_to_double(op));
    }

    /// Coefficient k becomes (-1)^k a_k(L - t).
    friend LinearOperator reflect(const LinearOperator& op) {
        LinearOperator out = op;
        out.segments_.clear();
        for (auto it = op.segments_.rbegin(); it != op.segments_.rend(); ++it)
            out.segments_.push_back(op.mirror_segment(*it, op.length_, true));
        return out;
    }

private:
    /// Image of `seg` under t -> pivot - t; odd coefficients change sign.
    Segment mirror_segment(const Segment& seg, double pivot, bool odd_sign_flip) const {
        Segment out;
        out.begin = pivot - seg.end;
        out.end = pivot - seg.begin;
        out.pieces.reserve(seg.pieces.size());
        for (std::size_t k = 0; k < seg.pieces.size(); ++k) {
            CoefficientPiece p = seg.pieces[k];
            p.offset = p.offset + pivot * p.direction;
            p.direction = -p.direction;
            if (odd_sign_flip && (k % 2 == 1)) p.sign = -p.sign;
            out.pieces.push_back(std::move(p));
        }
        return out;
    }

    int half_order_;
    double base_length_;
    double length_;
    std::vector<Segment> segments_;
    double shift_ = 0.0;
};

/// Free-function spelling of LinearOperator::coefficient.
inline double coeff_value(const LinearOperator& op, int k, double t, double lam) {
    return op.coefficient(k, t, lam);
}

} // namespace greenkit
