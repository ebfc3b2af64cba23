#include "upsilon.hpp"

namespace homlab {

ComponentHistory scalar_component(ScalarHistory h) {
    ComponentHistory c;
    c.dim = 1;
    c.parts[0] = std::move(h);
    return c;
}

ComponentHistory vector_component(const VectorHistory& h) {
    ComponentHistory c;
    c.dim = 2;
    for (int k = 0; k < 2; ++k) {
        c.parts[k].times = h.times;
        c.parts[k].frames.reserve(h.size());
        for (const auto& f : h.frames) c.parts[k].frames.push_back(f.component(k));
    }
    return c;
}

ComponentHistory component_difference(const ComponentHistory& a, const ComponentHistory& b) {
    require(a.dim == b.dim && a.times() == b.times(), "component shapes differ");
    ComponentHistory d = a;
    for (int k = 0; k < a.dim; ++k)
        for (std::size_t m = 0; m < a.parts[k].size(); ++m) d.parts[k].frames[m] = a.parts[k].frames[m] - b.parts[k].frames[m];
    return d;
}

ComponentHistory zero_like(const ComponentHistory& like) {
    ComponentHistory z = like;
    for (int k = 0; k < z.dim; ++k)
        for (auto& f : z.parts[k].frames) std::fill(f.v.begin(), f.v.end(), 0.0);
    return z;
}

const char* upsilon_component_name(int index1) {
    static const char* names[12] = {"Y",     "F",      "PhiT_F",  "gradIdiv_T_F", "Fstar", "PhiT_Fstar",
                                    "gradIdiv_T_Fstar", "FD", "PhiT_FD", "gradIdiv_T_FD", "wick_gradY_F", "gradY_FD"};
    require(index1 >= 1 && index1 <= 12, "component index out of range");
    return names[index1 - 1];
}

}  // namespace homlab
