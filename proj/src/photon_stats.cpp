#include "rtx/photon_stats.hpp"

#include <boost/random/normal_distribution.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "rtx/parallel.hpp"
#include "rtx/rng.hpp"

namespace rtx {

SpectralDensity lorentzian_spectrum(double fwhm, double span, int n)
{
    if (!(fwhm > 0) || n < 2) throw std::invalid_argument("lorentzian_spectrum: needs fwhm > 0 and n >= 2");
    SpectralDensity S;
    S.delta = Eigen::VectorXd::LinSpaced(n, -span * fwhm, span * fwhm);
    S.S2 = S.delta.unaryExpr([fwhm](double d) { return 1.0 / (1.0 + 4.0 * d * d / (fwhm * fwhm)); });
    return S;
}

cd G1Result::operator()(double t) const
{
    if (t < 0) return std::conj((*this)(-t));
    const Eigen::Index n = tau.size();
    if (n == 0) return 0.0;
    if (n == 1 || t > tau(n - 1)) return 0.0;
    const double dtau = tau(1) - tau(0);
    double x = t / dtau;
    Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), n - 2);
    double f = x - static_cast<double>(k);
    return (1.0 - f) * g1(k) + f * g1(k + 1);
}

double G1Result::coherence_time() const
{
    const double level = std::exp(-1.0);
    for (Eigen::Index k = 1; k < g1.size(); ++k) {
        double a = std::abs(g1(k - 1)), b = std::abs(g1(k));
        if (b <= level) return tau(k - 1) + (tau(k) - tau(k - 1)) * (a - level) / (a - b);
    }
    return std::numeric_limits<double>::infinity();
}

G1Result g1_from_spectrum(const SpectralDensity& S)
{
    const Eigen::Index n = S.delta.size();
    if (n < 2 || S.S2.size() != n) throw std::invalid_argument("g1_from_spectrum: bad spectral grid");
    if ((S.S2.array() < 0).any()) throw std::invalid_argument("g1_from_spectrum: negative spectral density");
    const double dd = S.delta(1) - S.delta(0);
    if (!(dd > 0)) throw std::invalid_argument("g1_from_spectrum: detuning grid must increase");

    std::vector<cd> in(n), out;
    for (Eigen::Index j = 0; j < n; ++j) in[j] = S.S2(j) * ((j == 0 || j == n - 1) ? 0.5 * dd : dd);
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    if (std::abs(out[0]) == 0.0) throw std::invalid_argument("g1_from_spectrum: spectrum integrates to zero");

    G1Result r;
    const Eigen::Index half = n / 2 + 1;
    const double dtau = two_pi / (static_cast<double>(n) * dd);
    r.tau.resize(half);
    r.g1.resize(half);
    const cd i(0.0, 1.0);
    for (Eigen::Index k = 0; k < half; ++k) {
        double t = dtau * static_cast<double>(k);
        r.tau(k) = t;
        r.g1(k) = std::exp(-i * S.delta(0) * t) * out[k] / out[0];
    }
    const double peak = S.S2.maxCoeff();
    r.edge_fraction = peak > 0 ? std::max(S.S2(0), S.S2(n - 1)) / peak : 0.0;
    r.leakage = r.edge_fraction > 0.01;
    return r;
}

double lorentzian_g1(double tau, double fwhm) { return std::exp(-0.5 * fwhm * std::abs(tau)); }

double g2_predicted(double tau, const G2Inputs& in)
{
    const double c = in.eta * in.N_bar;
    const double den = in.n_th + in.n_st + c;
    if (den == 0.0) throw std::domain_error("g2_predicted: n_th + n_st + eta N is zero");
    const cd g1 = in.g1 ? in.g1(tau) : cd(1.0);
    return 1.0 + (std::norm(in.n_th * g1 + c) - c * c) / (den * den);
}

double exponential_g2_model(double tau, double g2_0, double tau_coh)
{
    if (!(tau_coh > 0)) throw std::domain_error("exponential_g2_model: tau_coh must be positive");
    return 1.0 + (g2_0 - 1.0) * std::exp(-tau / tau_coh);
}

namespace {

struct ShardTally {
    std::vector<long> hist;  // signed lag k at index k + W - 1
    long A = 0, B = 0;
};

void run_shard(const G2Inputs& in, const HbtOptions& opt, int W, std::uint64_t stream, long pulses,
               ShardTally& tally)
{
    CounterRng rng(opt.seed, stream);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double rho = in.n_th > 0 ? std::exp(-opt.bin / opt.tau_coh) : 0.0;
    const double kick = std::sqrt(1.0 - rho * rho);
    const double sig = std::sqrt(in.n_th / W / 2.0);  // per quadrature
    const double alpha = std::sqrt(std::max(0.0, in.eta * in.N_bar) / W);
    const double stray = in.n_st / W;

    std::vector<double> cum(W);
    std::vector<int> a_bins, b_bins;
    tally.hist.assign(2 * W - 1, 0);

    for (long p = 0; p < pulses; ++p) {
        double total = 0;
        if (in.n_th > 0) {
            double re = sig * normal(rng), im = sig * normal(rng);
            for (int k = 0; k < W; ++k) {
                double x = re + alpha;
                total += x * x + im * im + stray;
                cum[k] = total;
                re = rho * re + kick * sig * normal(rng);
                im = rho * im + kick * sig * normal(rng);
            }
        } else {
            const double lam = alpha * alpha + stray;
            for (int k = 0; k < W; ++k) cum[k] = (total += lam);
        }
        if (total <= 0) continue;

        std::poisson_distribution<int> clicks(total);
        int n = clicks(rng);
        if (n == 0) continue;
        a_bins.clear();
        b_bins.clear();
        for (int c = 0; c < n; ++c) {
            double u = unif(rng) * total;
            int k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
            k = std::min(k, W - 1);
            if (rng() & 1ULL)
                b_bins.push_back(k);
            else
                a_bins.push_back(k);
        }
        tally.A += static_cast<long>(a_bins.size());
        tally.B += static_cast<long>(b_bins.size());
        for (int i : a_bins)
            for (int j : b_bins) ++tally.hist[j - i + W - 1];
    }
}

}  // namespace

HbtResult hbt_monte_carlo(const G2Inputs& in, const HbtOptions& opt)
{
    if (opt.pulses < 10000) throw std::invalid_argument("hbt_monte_carlo: needs at least 1e4 pulses");
    if (!(opt.bin > 0) || !(opt.window >= opt.bin)) throw std::invalid_argument("hbt_monte_carlo: bad bin/window");
    if (in.n_th > 0 && !(opt.tau_coh > 0)) throw std::invalid_argument("hbt_monte_carlo: tau_coh must be positive");
    if (in.n_th < 0 || in.n_st < 0 || in.eta * in.N_bar < 0) throw std::invalid_argument("hbt_monte_carlo: negative mean count");
    if (opt.rebin < 1 || opt.shard_pulses < 1) throw std::invalid_argument("hbt_monte_carlo: bad rebin/shard size");

    const int W = static_cast<int>(std::lround(opt.window / opt.bin));
    const long n_shards = (opt.pulses + opt.shard_pulses - 1) / opt.shard_pulses;
    std::vector<ShardTally> tallies(n_shards);
    parallel_for(
        static_cast<std::size_t>(n_shards),
        [&](std::size_t s) {
            long first = static_cast<long>(s) * opt.shard_pulses;
            long count = std::min(opt.shard_pulses, opt.pulses - first);
            run_shard(in, opt, W, s, count, tallies[s]);
        },
        opt.workers);

    std::vector<long> hist(2 * W - 1, 0);
    HbtResult r;
    r.pulses = opt.pulses;
    for (const auto& t : tallies) {
        for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += t.hist[k];
        r.clicks_A += t.A;
        r.clicks_B += t.B;
    }

    const int nb = (W + opt.rebin - 1) / opt.rebin;
    r.tau.setZero(nb);
    r.g2.setZero(nb);
    r.err.setZero(nb);
    r.expected.setZero(nb);
    r.coincidences.setZero(nb);
    r.analytic.setZero(nb);
    const double norm = static_cast<double>(r.clicks_A) * static_cast<double>(r.clicks_B) /
                        (static_cast<double>(opt.pulses) * W * W);
    for (int b = 0; b < nb; ++b) {
        double wsum = 0, tsum = 0, asum = 0;
        for (int m = b * opt.rebin; m < std::min(W, (b + 1) * opt.rebin); ++m) {
            for (int sgn : {1, -1}) {
                if (m == 0 && sgn < 0) continue;
                int k = sgn * m;
                double w = W - m;
                r.coincidences(b) += static_cast<double>(hist[k + W - 1]);
                r.expected(b) += norm * w;
                wsum += w;
                tsum += w * m * opt.bin;
                asum += w * g2_predicted(m * opt.bin, in);
            }
        }
        r.tau(b) = tsum / wsum;
        r.analytic(b) = asum / wsum;
        if (r.expected(b) > 0) {
            r.g2(b) = r.coincidences(b) / r.expected(b);
            r.err(b) = std::sqrt(std::max(r.coincidences(b), 1.0)) / r.expected(b);
        }
    }
    return r;
}

}  // namespace rtx
