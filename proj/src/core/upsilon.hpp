#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "field.hpp"

namespace homlab {

/// A scalar- or vector-valued space-time object stored as one scalar history
/// per component. Norms of a vector component take the max over components.
struct ComponentHistory {
    int dim = 0;  // 0 marks a missing component
    std::array<ScalarHistory, 2> parts;

    bool present() const { return dim > 0 && !parts[0].empty(); }
    const std::vector<double>& times() const { return parts[0].times; }
};

ComponentHistory scalar_component(ScalarHistory h);
ComponentHistory vector_component(const VectorHistory& h);
ComponentHistory component_difference(const ComponentHistory& a, const ComponentHistory& b);
/// A zero component shaped like `like`.
ComponentHistory zero_like(const ComponentHistory& like);

/// The twelve enhanced objects, in order:
///  1 Y, 2 F, 3 Phi^T F, 4 (grad I(div a))^T F, 5 F*, 6 Phi^T F*,
///  7 (grad I(div a))^T F*, 8 F^D, 9 Phi^T F^D, 10 (grad I(div a))^T F^D,
///  11 grad^T Y <> F (Wick), 12 grad^T Y . F^D.
struct StochasticVector {
    std::array<ComponentHistory, 12> c;
    int N = 0;  // 0 for the homogenised limit
    double delta = 0.0;
    std::uint64_t seed = 0;
};

/// Components 4, 7 and 10, which carry grad I(div a).
constexpr bool in_group_B(int index1) { return index1 == 4 || index1 == 7 || index1 == 10; }

const char* upsilon_component_name(int index1);

}  // namespace homlab
