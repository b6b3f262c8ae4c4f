#pragma once

#include <array>
#include <cstddef>

namespace prepctl {

template <std::size_t N>
using StateVec = std::array<double, N>;

using Vec4 = StateVec<4>;
using Vec5 = StateVec<5>;

// Compartment populations of the four-class model:
// susceptible, HIV-infected (pre-AIDS), chronic under treatment, AIDS-symptomatic.
struct SicaState {
    double S = 0.0;
    double I = 0.0;
    double C = 0.0;
    double A = 0.0;

    double total() const { return S + I + C + A; }
    Vec4 to_array() const { return {S, I, C, A}; }
    static SicaState from_array(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

// The five-class extension with a PrEP-protected class E.
struct SicaeState {
    double S = 0.0;
    double I = 0.0;
    double C = 0.0;
    double A = 0.0;
    double E = 0.0;

    double total() const { return S + I + C + A + E; }
    Vec5 to_array() const { return {S, I, C, A, E}; }
    static SicaeState from_array(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
    SicaState drop_protected() const { return {S, I, C, A}; }
};

}  // namespace prepctl
