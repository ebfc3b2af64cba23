#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace homlab {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
// Plans use FFTW_ESTIMATE so the chosen algorithm, and hence every rounding,
// is identical from run to run.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct Workspace {
    int n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;

    explicit Workspace(int size) : n(size) {
        real = static_cast<double*>(fftw_malloc(sizeof(double) * size * size));
        cplx = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size * (size / 2 + 1)));
    }
    ~Workspace() {
        fftw_free(real);
        fftw_free(cplx);
    }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
};

Workspace& workspace(int n) {
    thread_local std::map<int, std::unique_ptr<Workspace>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Workspace>(n);
    return *slot;
}

const PlanPair& plans(int n) {
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Workspace tmp(n);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_2d(n, n, tmp.real, tmp.cplx, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_2d(n, n, tmp.cplx, tmp.real, FFTW_ESTIMATE);
    return cache.emplace(n, p).first->second;
}

}  // namespace

Spectrum fourier_transform(const ScalarField& f) {
    const int n = f.grid.n();
    const PlanPair& p = plans(n);
    Workspace& w = workspace(n);
    std::memcpy(w.real, f.v.data(), sizeof(double) * f.v.size());
    fftw_execute_dft_r2c(p.forward, w.real, w.cplx);
    Spectrum s;
    s.grid = f.grid;
    const std::size_t m = static_cast<std::size_t>(n) * (n / 2 + 1);
    s.c.resize(m);
    const double scale = f.grid.h() * f.grid.h();
    for (std::size_t i = 0; i < m; ++i) s.c[i] = {w.cplx[i][0] * scale, w.cplx[i][1] * scale};
    return s;
}

ScalarField inverse_fourier(const Spectrum& s) {
    const int n = s.n();
    const PlanPair& p = plans(n);
    Workspace& w = workspace(n);
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        w.cplx[i][0] = s.c[i].real();
        w.cplx[i][1] = s.c[i].imag();
    }
    fftw_execute_dft_c2r(p.backward, w.cplx, w.real);
    ScalarField f(s.grid);
    std::memcpy(f.v.data(), w.real, sizeof(double) * f.v.size());
    return f;
}

double spectral_energy(const Spectrum& s) {
    double e = 0.0;
    for (int r = 0; r < s.n(); ++r)
        for (int col = 0; col < s.cols(); ++col) e += s.multiplicity(col) * std::norm(s.at(r, col));
    return e;
}

}  // namespace homlab
