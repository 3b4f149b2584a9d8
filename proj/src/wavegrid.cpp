#include "qat/wavegrid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "qat/errors.hpp"

namespace qat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPad = 4;
constexpr int kStencil = 16;

// FFTW planning is not thread-safe; execution with new-array API is.
fftw_plan plan_for(int n, int sign) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<fftw_complex> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, a.data(), b.data(), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
}

CVec transform(const CVec& v, int sign) {
    CVec out(v.size());
    auto* in = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(v.data()));
    fftw_execute_dft(plan_for(static_cast<int>(v.size()), sign), in,
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("wavefunctions live on different grids");
    if (a.frame != b.frame) throw GridMismatch("wavefunctions live in different frames");
}

}  // namespace

Grid::Grid(double lo, double hi, int points) : x_min(lo), x_max(hi), n(points) {
    if (!(hi > lo)) throw InvalidArgument("grid needs x_max > x_min");
    if (points < 8 || !is_pow2(points)) throw InvalidArgument("n must be a power of two");
}

Eigen::VectorXd Grid::points() const {
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = this->x(j);
    return x;
}

Eigen::VectorXd Grid::wavenumbers() const {
    Eigen::VectorXd k(n);
    const double dk = 2 * kPi / length();
    for (int j = 0; j < n; ++j) k[j] = dk * (j < n / 2 ? j : j - n);
    return k;
}

WaveFunction::WaveFunction(const Grid& g, CVec amplitudes, double t, Frame f)
    : grid(g), psi(std::move(amplitudes)), time(t), frame(f) {
    if (psi.size() != g.n) throw GridMismatch("amplitude count does not match grid");
}

double WaveFunction::norm() const { return std::sqrt(psi.squaredNorm() * grid.dx()); }

WaveFunction WaveFunction::normalized() const {
    WaveFunction out = *this;
    out.psi /= norm();
    return out;
}

cplx inner(const WaveFunction& a, const WaveFunction& b) {
    require_same(a, b);
    return a.psi.dot(b.psi) * a.grid.dx();
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("wavefunctions live on different grids");
    return std::sqrt((a.psi - b.psi).squaredNorm() * a.grid.dx());
}

CVec fft(const CVec& v) { return transform(v, FFTW_FORWARD); }

CVec ifft(const CVec& v) { return transform(v, FFTW_BACKWARD) / static_cast<double>(v.size()); }

CVec spectral_derivative(const Grid& g, const CVec& psi, int order) {
    if (order == 0) return psi;
    const Eigen::VectorXd k = g.wavenumbers();
    CVec c = fft(psi);
    const cplx ik(0, 1);
    for (int j = 0; j < g.n; ++j) c[j] *= std::pow(ik * k[j], order);
    if (order % 2 == 1) c[g.n / 2] = 0;
    return ifft(c);
}

CMat derivative_matrix(const Grid& g, int order) {
    CMat d(g.n, g.n);
    CVec e = CVec::Zero(g.n);
    for (int j = 0; j < g.n; ++j) {
        e.setZero();
        e[j] = 1;
        d.col(j) = spectral_derivative(g, e, order);
    }
    return d;
}

WaveFunction free_evolve(const WaveFunction& psi, double tau, double m, double hbar) {
    if (psi.frame != Frame::Free) throw InvalidArgument("free_evolve needs a free-frame state");
    WaveFunction out = psi;
    out.time = psi.time + tau;
    if (tau == 0.0) return out;
    const Eigen::VectorXd k = psi.grid.wavenumbers();
    CVec c = fft(psi.psi);
    for (int j = 0; j < psi.grid.n; ++j)
        c[j] *= std::exp(cplx(0, -hbar * k[j] * k[j] * tau / (2 * m)));
    out.psi = ifft(c);
    return out;
}

WaveFunction quadratic_phase(const WaveFunction& psi, double c) {
    WaveFunction out = psi;
    if (c == 0.0) return out;
    for (int j = 0; j < psi.grid.n; ++j) {
        const double x = psi.grid.x(j);
        out.psi[j] *= std::exp(cplx(0, c * x * x));
    }
    return out;
}

WaveFunction translate(const WaveFunction& psi, double a) {
    WaveFunction out = psi;
    if (a == 0.0) return out;
    const Eigen::VectorXd k = psi.grid.wavenumbers();
    CVec c = fft(psi.psi);
    const int nyq = psi.grid.n / 2;
    const cplx cn = c[nyq];
    for (int j = 0; j < psi.grid.n; ++j) c[j] *= std::exp(cplx(0, -k[j] * a));
    // The Nyquist mode has no unique shift; use the symmetric (cosine) part.
    c[nyq] = cn * std::cos(k[nyq] * a);
    out.psi = ifft(c);
    return out;
}

SupportCheck support_check(const WaveFunction& in, const WaveFunction& out) {
    SupportCheck r;
    const double nin = in.norm(), nout = out.norm();
    r.norm_change = nin > 0 ? std::abs(nout - nin) / nin : 0.0;
    const int strip = std::max(1, out.grid.n / 40);
    double edge = 0;
    for (int j = 0; j < strip; ++j)
        edge += std::norm(out.psi[j]) + std::norm(out.psi[out.grid.n - 1 - j]);
    const double total = out.psi.squaredNorm();
    r.edge_mass = total > 0 ? edge / total : 0.0;
    r.overflow = r.edge_mass > 1e-6 || r.norm_change > 1e-6;
    return r;
}

WaveFunction dilate(const WaveFunction& psi, double s, SupportCheck* check) {
    if (s == 0.0) throw InvalidArgument("dilation factor must be non-zero");
    WaveFunction out = psi;
    if (s == 1.0) {
        if (check) *check = support_check(psi, out);
        return out;
    }
    const Grid& g = psi.grid;
    const int n = g.n, nf = kPad * n;

    // Zero-pad the spectrum, splitting the Nyquist coefficient between +-n/2.
    const CVec c = fft(psi.psi);
    CVec cf = CVec::Zero(nf);
    for (int j = 0; j < n / 2; ++j) cf[j] = c[j];
    for (int j = n / 2 + 1; j < n; ++j) cf[nf - n + j] = c[j];
    cf[n / 2] = 0.5 * c[n / 2];
    cf[nf - n / 2] = 0.5 * c[n / 2];
    const CVec fine = ifft(cf) * static_cast<double>(kPad);

    // Barycentric-free Lagrange weights on integer nodes 0..kStencil-1.
    const double hf = g.dx() / kPad;
    const double amp = 1.0 / std::sqrt(std::abs(s));
    for (int j = 0; j < n; ++j) {
        const double y = g.x(j) / s;
        if (y < g.x_min || y >= g.x_max) {
            out.psi[j] = 0;
            continue;
        }
        const double p = (y - g.x_min) / hf;
        const int base = static_cast<int>(std::floor(p)) - kStencil / 2 + 1;
        const double r = p - base;
        cplx acc = 0;
        for (int a = 0; a < kStencil; ++a) {
            double w = 1.0;
            for (int b = 0; b < kStencil; ++b)
                if (b != a) w *= (r - b) / static_cast<double>(a - b);
            const int idx = ((base + a) % nf + nf) % nf;
            acc += w * fine[idx];
        }
        out.psi[j] = amp * acc;
    }
    if (check) *check = support_check(psi, out);
    return out;
}

WaveFunction gaussian(const Grid& g, double x0, double p0, double sigma, double hbar) {
    CVec v(g.n);
    const double pref = std::pow(2 * kPi * sigma * sigma, -0.25);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        v[j] = pref * std::exp(cplx(-(x - x0) * (x - x0) / (4 * sigma * sigma), p0 * x / hbar));
    }
    return WaveFunction(g, v);
}

WaveFunction plane_wave(const Grid& g, double k) {
    CVec v(g.n);
    for (int j = 0; j < g.n; ++j) v[j] = std::exp(cplx(0, k * g.x(j)));
    return WaveFunction(g, v);
}

void write_csv(const std::string& path, const WaveFunction& psi) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw InvalidArgument("cannot open " + path);
    std::fputs("x,re,im\n", f);
    for (int j = 0; j < psi.grid.n; ++j)
        std::fprintf(f, "%.12e,%.12e,%.12e\n", psi.grid.x(j), psi.psi[j].real(), psi.psi[j].imag());
    std::fclose(f);
}

WaveFunction read_csv(const std::string& path, double time, Frame frame) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::vector<double> xs;
    std::vector<cplx> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double x, re, im;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &re, &im) != 3)
            throw InvalidArgument("malformed row in " + path);
        xs.push_back(x);
        vals.emplace_back(re, im);
    }
    const int n = static_cast<int>(xs.size());
    if (n < 2) throw InvalidArgument("too few rows in " + path);
    const double dx = (xs.back() - xs.front()) / (n - 1);
    Grid g(xs.front(), xs.front() + n * dx, n);
    return WaveFunction(g, Eigen::Map<CVec>(vals.data(), n), time, frame);
}

namespace {
constexpr char kMagic[4] = {'Q', 'A', 'W', '1'};

template <class T>
void put(std::vector<unsigned char>& b, T v) {
    static_assert(std::endian::native == std::endian::little);
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    b.insert(b.end(), tmp, tmp + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& b, size_t& pos) {
    if (pos + sizeof(T) > b.size()) throw InvalidArgument("truncated wavefunction record");
    T v;
    std::memcpy(&v, b.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}
}  // namespace

std::vector<unsigned char> to_bytes(const WaveFunction& psi) {
    std::vector<unsigned char> b(kMagic, kMagic + 4);
    put<std::uint32_t>(b, static_cast<std::uint32_t>(psi.grid.n));
    put(b, psi.grid.x_min);
    put(b, psi.grid.x_max);
    put(b, psi.time);
    put<std::uint8_t>(b, psi.frame == Frame::Free ? 1 : 0);
    for (int j = 0; j < psi.grid.n; ++j) {
        put(b, psi.psi[j].real());
        put(b, psi.psi[j].imag());
    }
    return b;
}

WaveFunction from_bytes(const std::vector<unsigned char>& b) {
    if (b.size() < 4 || std::memcmp(b.data(), kMagic, 4) != 0)
        throw InvalidArgument("bad wavefunction magic");
    size_t pos = 4;
    const auto n = get<std::uint32_t>(b, pos);
    const double lo = get<double>(b, pos), hi = get<double>(b, pos), t = get<double>(b, pos);
    const auto fr = get<std::uint8_t>(b, pos);
    CVec v(n);
    for (std::uint32_t j = 0; j < n; ++j) {
        const double re = get<double>(b, pos), im = get<double>(b, pos);
        v[j] = cplx(re, im);
    }
    return WaveFunction(Grid(lo, hi, static_cast<int>(n)), v, t, fr ? Frame::Free : Frame::Lsode);
}

void write_binary(const std::string& path, const WaveFunction& psi) {
    const auto b = to_bytes(psi);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open " + path);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

WaveFunction read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path);
    std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_bytes(b);
}

}  // namespace qat
