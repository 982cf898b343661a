#ifndef WGMQED_POLARIZATION_HPP
#define WGMQED_POLARIZATION_HPP

#include "wgmqed/errors.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace wgmqed {

/// Analyzer output labels. Circular convention: R = (H - iV)/sqrt2, L = (H + iV)/sqrt2.
enum class Pol { H, V, P, M, R, L };

inline constexpr std::array<Pol, 6> all_pols{Pol::H, Pol::V, Pol::P, Pol::M, Pol::R, Pol::L};
inline constexpr std::string_view circular_convention = "R=(H-iV)/sqrt2, L=(H+iV)/sqrt2";

inline char to_char(Pol p) {
    static constexpr std::array<char, 6> names{'H', 'V', 'P', 'M', 'R', 'L'};
    return names[static_cast<int>(p)];
}

inline Pol pol_from_char(char c) {
    switch (c) {
        case 'H': return Pol::H;
        case 'V': return Pol::V;
        case 'P': return Pol::P;
        case 'M': return Pol::M;
        case 'R': return Pol::R;
        case 'L': return Pol::L;
        default: throw InvalidArgument(std::string("unknown polarization label '") + c + "'");
    }
}

/// Single-photon polarization amplitudes (alpha_H, alpha_V).
struct JonesVector {
    std::complex<double> h{0.0, 0.0};
    std::complex<double> v{0.0, 0.0};

    double norm2() const { return std::norm(h) + std::norm(v); }

    JonesVector normalized() const {
        const double n = std::sqrt(norm2());
        if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero Jones vector");
        return {h / n, v / n};
    }

    JonesVector scaled(std::complex<double> s) const { return {s * h, s * v}; }
};

inline JonesVector unit_vector(Pol p) {
    constexpr double r = std::numbers::sqrt2 / 2.0;
    using c = std::complex<double>;
    switch (p) {
        case Pol::H: return {c{1, 0}, c{0, 0}};
        case Pol::V: return {c{0, 0}, c{1, 0}};
        case Pol::P: return {c{r, 0}, c{r, 0}};
        case Pol::M: return {c{r, 0}, c{-r, 0}};
        case Pol::R: return {c{r, 0}, c{0, -r}};
        case Pol::L: return {c{r, 0}, c{0, r}};
    }
    return {};
}

/// <u_p | field>.
inline std::complex<double> project(Pol p, const JonesVector& field) {
    const JonesVector u = unit_vector(p);
    return std::conj(u.h) * field.h + std::conj(u.v) * field.v;
}

inline std::complex<double> inner(const JonesVector& a, const JonesVector& b) {
    return std::conj(a.h) * b.h + std::conj(a.v) * b.v;
}

/// Unordered pair of analyzer outputs, stored with first <= second in label order.
class DetectorSetting {
public:
    DetectorSetting(Pol a, Pol b) : first_(a), second_(b) {
        if (static_cast<int>(second_) < static_cast<int>(first_)) std::swap(first_, second_);
    }

    /// Accepts "RL", "R/L", "LR".
    static DetectorSetting parse(std::string_view text) {
        std::string letters;
        for (char c : text) {
            if (c == '/' || c == ' ') continue;
            letters.push_back(c);
        }
        if (letters.size() != 2) throw InvalidArgument("detector setting must name two labels: '" + std::string(text) + "'");
        return {pol_from_char(letters[0]), pol_from_char(letters[1])};
    }

    Pol first() const noexcept { return first_; }
    Pol second() const noexcept { return second_; }
    bool same_label() const noexcept { return first_ == second_; }
    std::string name() const { return {to_char(first_), to_char(second_)}; }

    friend bool operator==(const DetectorSetting&, const DetectorSetting&) = default;

private:
    Pol first_;
    Pol second_;
};

/// All unordered pairs with repetition over {H,V,P,M,R,L} except RR and VV (19 settings).
inline std::vector<DetectorSetting> canonical_settings() {
    std::vector<DetectorSetting> out;
    for (std::size_t i = 0; i < all_pols.size(); ++i) {
        for (std::size_t j = i; j < all_pols.size(); ++j) {
            const DetectorSetting s(all_pols[i], all_pols[j]);
            if (s.name() == "RR" || s.name() == "VV") continue;
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace wgmqed

#endif
