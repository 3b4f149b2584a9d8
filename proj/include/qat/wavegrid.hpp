#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qat {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Uniform periodic grid x_j = x_min + j dx, j < n.
struct Grid {
    double x_min = -16.0;
    double x_max = 16.0;
    int n = 512;

    Grid() = default;
    Grid(double lo, double hi, int points);  // throws InvalidArgument

    double dx() const { return (x_max - x_min) / n; }
    double length() const { return x_max - x_min; }
    double x(int j) const { return x_min + j * dx(); }
    Eigen::VectorXd points() const;
    Eigen::VectorXd wavenumbers() const;  // FFT order; Nyquist carries -pi/dx

    bool operator==(const Grid& o) const {
        return x_min == o.x_min && x_max == o.x_max && n == o.n;
    }
};

enum class Frame { Lsode, Free };

struct WaveFunction {
    Grid grid;
    CVec psi;
    double time = 0.0;
    Frame frame = Frame::Lsode;

    WaveFunction() = default;
    WaveFunction(const Grid& g, CVec amplitudes, double t = 0.0, Frame f = Frame::Lsode);

    double norm() const;  // sqrt(sum |psi|^2 dx)
    WaveFunction normalized() const;
};

cplx inner(const WaveFunction& a, const WaveFunction& b);  // throws GridMismatch
double l2_distance(const WaveFunction& a, const WaveFunction& b);

// Unnormalized DFT and inverse (inverse includes 1/n).
CVec fft(const CVec& v);
CVec ifft(const CVec& v);

// d^order psi / dx^order by Fourier multiplier; odd orders drop the Nyquist mode.
CVec spectral_derivative(const Grid& g, const CVec& psi, int order);
// Dense matrices of the same operators.
CMat derivative_matrix(const Grid& g, int order);

WaveFunction free_evolve(const WaveFunction& psi, double tau, double m, double hbar);
WaveFunction quadratic_phase(const WaveFunction& psi, double c);
// psi(x) -> psi(x - a) by the Fourier shift theorem.
WaveFunction translate(const WaveFunction& psi, double a);

struct SupportCheck {
    double edge_mass = 0.0;    // fraction of output norm^2 in the outer 2.5% strips
    double norm_change = 0.0;  // | |out| - |in| | / |in|
    bool overflow = false;
};

// psi(x) -> |s|^{-1/2} psi(x / s). Samples are read from the 4x zero-padded
// trigonometric interpolant by 16-point local Lagrange interpolation; points
// whose preimage leaves the box get zero.
WaveFunction dilate(const WaveFunction& psi, double s, SupportCheck* check = nullptr);
SupportCheck support_check(const WaveFunction& in, const WaveFunction& out);

WaveFunction gaussian(const Grid& g, double x0, double p0, double sigma, double hbar = 1.0);
WaveFunction plane_wave(const Grid& g, double k);

void write_csv(const std::string& path, const WaveFunction& psi);
WaveFunction read_csv(const std::string& path, double time = 0.0, Frame frame = Frame::Lsode);
void write_binary(const std::string& path, const WaveFunction& psi);
WaveFunction read_binary(const std::string& path);
std::vector<unsigned char> to_bytes(const WaveFunction& psi);
WaveFunction from_bytes(const std::vector<unsigned char>& bytes);

}  // namespace qat
