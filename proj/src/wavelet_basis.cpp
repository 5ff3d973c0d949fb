#include "addwav/wavelet_basis.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <string>

namespace addwav {
namespace {

// Minimum-phase Daubechies synthesis filters, R = 1..10 vanishing moments.
// Computed by spectral factorisation at 60-digit precision.
const std::array<std::vector<double>, 10> kDaubechiesTaps = {{
    {0.707106781186547524401, 0.707106781186547524401},
    {0.482962913144534143375, 0.836516303737807905575, 0.224143868042013381026,
     -0.129409522551260381174},
    {0.332670552950082615999, 0.806891509311092576494, 0.459877502118491570095,
     -0.135011020010254588696, -0.0854412738820266616928, 0.0352262918857095366027},
    {0.230377813308896500863, 0.71484657055291564709, 0.630880767929858907882,
     -0.0279837694168598542114, -0.18703481171909308408, 0.0308413818355607636272,
     0.0328830116668851997354, -0.0105974017850690321049},
    {0.160102397974192914481, 0.60382926979718967054, 0.724308528437772927728,
     0.138428145901320731505, -0.242294887066382031863, -0.0322448695846383746485,
     0.0775714938400457135231, -0.00624149021279827427419, -0.0125807519990819994685,
     0.003335725285473771278},
    {0.111540743350109463621, 0.494623890398453085677, 0.751133908021095350679,
     0.315250351709197629086, -0.226264693965439820076, -0.129766867567261935562,
     0.0975016055873230491023, 0.0275228655303057286255, -0.0315820393174860295651,
     0.000553842201161496139252, 0.00477725751094551063964, -0.00107730108530847956485},
    {0.07785205408500917902, 0.396539319481917306539, 0.729132090846235119917,
     0.469782287405193122472, -0.143906003928564975405, -0.224036184993874982638,
     0.0713092192668302647509, 0.0806126091510830719129, -0.0380299369350144135796,
     -0.0165745416306668806541, 0.012550998556099840613, 0.000429577972921366521132,
     -0.00180164070404749091527, 0.000353713799974520248446},
    {0.054415842243104009955, 0.312871590914299970659, 0.675630736297289806808,
     0.585354683654206712771, -0.0158291052563493056674, -0.284015542961546926516,
     0.000472484573913282770361, 0.128747426620478458857, -0.0173693010018075461696,
     -0.0440882539307947515068, 0.0139810279173982816487, 0.00874609404740577671638,
     -0.00487035299345157431042, -0.000391740373376947046298, 0.00067544940645056936637,
     -0.000117476784124769533731},
    {0.0380779473638783465887, 0.243834674612590353732, 0.604823123690111111903,
     0.657288078051300538078, 0.133197385825007576191, -0.293273783279174908806,
     -0.0968407832229764605135, 0.148540749338106380135, 0.0307256814793333792123,
     -0.0676328290613299736756, 0.000250947114831451957587, 0.0223616621236790972054,
     -0.00472320475775139727793, -0.0042815036824634298345, 0.00184764688305622647662,
     0.000230385763523195967205, -0.000251963188942710136975, 0.0000393473203162715994807},
    {0.0266700579005555535866, 0.188176800077691489021, 0.527201188931725586482,
     0.688459039453603565742, 0.281172343660577460749, -0.249846424327315379416,
     -0.195946274377377043504, 0.127369340335793260083, 0.0930573646035723511604,
     -0.0713941471663970871453, -0.0294575368218758128583, 0.0332126740593410017398,
     0.00360655356695616965542, -0.0107331754833305750443, 0.00139535174705290116579,
     0.00199240529518505611716, -0.000685856694959711626561, -0.000116466855129285450951,
     0.0000935886703200695913341, -0.0000132642028945212448124},
}};

int positive_mod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

void check_level(int j, int k) {
  if (j < 0 || j > 30) throw InvalidArgument("wavelet level out of range: j=" + std::to_string(j));
  if (k < 0 || k >= (1 << j))
    throw InvalidArgument("translation out of range: k=" + std::to_string(k) +
                          " at level j=" + std::to_string(j));
}

}  // namespace

Eigen::VectorXd WaveletFamily::high_pass() const {
  const Eigen::Index n = low_pass.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index k = 0; k < n; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * low_pass[n - 1 - k];
  return g;
}

WaveletFamily make_family(int R) {
  if (R < 1 || R > 10)
    throw InvalidArgument("vanishing moments R must lie in [1, 10], got " + std::to_string(R));
  WaveletFamily fam;
  fam.R = R;
  const auto& taps = kDaubechiesTaps[static_cast<std::size_t>(R - 1)];
  fam.low_pass = Eigen::Map<const Eigen::VectorXd>(taps.data(), static_cast<Eigen::Index>(taps.size()));
  fam.support_length = 2 * R - 1;
  fam.tau = 0;
  while ((1 << fam.tau) < 2 * R) ++fam.tau;
  return fam;
}

BasisTable::BasisTable(WaveletFamily family, int depth, Eigen::VectorXd phi, Eigen::VectorXd psi)
    : family_(std::move(family)),
      depth_(depth),
      scale_(std::ldexp(1.0, depth)),
      step_(std::ldexp(1.0, -depth)),
      phi_(std::move(phi)),
      psi_(std::move(psi)) {
  const Eigen::Index expected = static_cast<Eigen::Index>(family_.support_length) * (Eigen::Index{1} << depth) + 1;
  if (phi_.size() != expected || psi_.size() != expected)
    throw InvalidArgument("basis table sample count does not match support and depth");
}

BasisTable cascade_table(const WaveletFamily& family, int depth) {
  if (depth < 6 || depth > 16)
    throw InvalidArgument("cascade depth must lie in [6, 16], got " + std::to_string(depth));
  const int L = family.support_length;
  const Eigen::Index per_unit = Eigen::Index{1} << depth;
  const Eigen::Index count = L * per_unit + 1;
  const Eigen::VectorXd& h = family.low_pass;
  const double root2 = std::sqrt(2.0);
  const auto taps = static_cast<int>(h.size());

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(count);

  // Values at the integers: the eigenvector of M_{m,n} = sqrt2 h_{2m-n} for
  // eigenvalue 1, restricted to the interior integers 1..L-1.
  if (L == 1) {
    phi[0] = 1.0;  // Haar, right-continuous
  } else {
    const int m = L - 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        const int idx = 2 * (r + 1) - (c + 1);
        if (idx >= 0 && idx < taps) M(r, c) = root2 * h[idx];
      }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw InternalError("cascade: eigen-decomposition failed");
    Eigen::Index best = -1;
    double best_gap = 1e-8;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double gap = std::abs(es.eigenvalues()[i] - std::complex<double>(1.0, 0.0));
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < 0) throw InternalError("cascade: refinement matrix has no unit eigenvalue");
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    const double total = v.sum();
    if (std::abs(total) < 1e-12) throw InternalError("cascade: degenerate integer-point values");
    v /= total;
    for (int i = 0; i < m; ++i) phi[(i + 1) * per_unit] = v[i];
  }

  // Dyadic refinement: level l fills the odd multiples of 2^{-l}.
  for (int level = 1; level <= depth; ++level) {
    const Eigen::Index stride = Eigen::Index{1} << (depth - level);
    for (Eigen::Index idx = stride; idx < count; idx += 2 * stride) {
      // x = idx / per_unit; 2x - k has index 2*idx - k*per_unit.
      double acc = 0.0;
      for (int k = 0; k < taps; ++k) {
        const Eigen::Index src = 2 * idx - k * per_unit;
        if (src >= 0 && src < count) acc += h[k] * phi[src];
      }
      phi[idx] = root2 * acc;
    }
  }

  const Eigen::VectorXd g = family.high_pass();
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(count);
  for (Eigen::Index idx = 0; idx < count; ++idx) {
    double acc = 0.0;
    for (int k = 0; k < taps; ++k) {
      const Eigen::Index src = 2 * idx - k * per_unit;
      if (src >= 0 && src < count) acc += g[k] * phi[src];
    }
    psi[idx] = root2 * acc;
  }
  if (L == 1) {
    // Haar in closed form; the refinement above is exact only up to rounding of 1/sqrt2.
    for (Eigen::Index idx = 0; idx < per_unit; ++idx) {
      phi[idx] = 1.0;
      psi[idx] = 2 * idx < per_unit ? 1.0 : -1.0;
    }
    phi[per_unit] = 0.0;
    psi[per_unit] = 0.0;
  }
  if (!phi.allFinite() || !psi.allFinite()) throw InternalError("cascade: non-finite samples");
  return BasisTable(family, depth, std::move(phi), std::move(psi));
}

double eval_periodized(const BasisTable& table, BasisKind kind, int j, int k, double x) {
  check_level(j, k);
  const double period = std::ldexp(1.0, j);
  const double L = table.family().support_length;
  const double t = period * x - k;
  // All integer shifts m with 0 <= t + m * period < L.
  double m = std::ceil(-t / period);
  double acc = 0.0;
  for (double u = t + m * period; u < L; u += period) acc += table.value(kind, u);
  return std::sqrt(period) * acc;
}

void accumulate_periodized(const BasisTable& table, BasisKind kind, int j, double x,
                           double weight, std::span<double> out) {
  const int period = 1 << j;
  if (static_cast<int>(out.size()) != period)
    throw InvalidArgument("accumulate_periodized: output length must be 2^j");
  const int L = table.family().support_length;
  const double t = std::ldexp(x, j);
  const int base = static_cast<int>(std::floor(t));
  const double w = weight * std::sqrt(static_cast<double>(period));
  for (int n = base - L + 1; n <= base; ++n) {
    const double v = table.value(kind, t - n);
    if (v != 0.0) out[static_cast<std::size_t>(positive_mod(n, period))] += w * v;
  }
}

WaveletCoeffs coeffs_1d(const BasisTable& table, const GridFunction& h, int j_star, int j_max) {
  if (j_star < 0 || j_max < j_star)
    throw InvalidArgument("coeffs_1d: need 0 <= j_star <= j_max");
  if (j_max > 24) throw InvalidArgument("coeffs_1d: j_max too large");
  if (h.size() < (Eigen::Index{1} << (j_max + 4)))
    throw InvalidArgument("coeffs_1d: grid too coarse for j_max=" + std::to_string(j_max) +
                          " (need >= 2^(j_max+4) samples)");
  WaveletCoeffs c;
  c.alpha = Eigen::VectorXd::Zero(Eigen::Index{1} << j_star);
  c.beta.first_level = j_star;
  for (int j = j_star; j <= j_max; ++j) c.beta.levels.push_back(Eigen::VectorXd::Zero(Eigen::Index{1} << j));

  const double w = 1.0 / static_cast<double>(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double hv = h.values[i];
    if (hv == 0.0) continue;
    const double x = h.point(i);
    accumulate_periodized(table, BasisKind::scaling, j_star, x, hv * w,
                          {c.alpha.data(), static_cast<std::size_t>(c.alpha.size())});
    for (int j = j_star; j <= j_max; ++j) {
      auto& lv = c.beta.levels[static_cast<std::size_t>(j - j_star)];
      accumulate_periodized(table, BasisKind::wavelet, j, x, hv * w,
                            {lv.data(), static_cast<std::size_t>(lv.size())});
    }
  }
  return c;
}

namespace {

double sum_level(const BasisTable& table, BasisKind kind, int j, const Eigen::VectorXd& c, double x) {
  const int period = 1 << j;
  const int L = table.family().support_length;
  const double t = std::ldexp(x, j);
  const int base = static_cast<int>(std::floor(t));
  double acc = 0.0;
  for (int n = base - L + 1; n <= base; ++n) {
    const double v = table.value(kind, t - n);
    if (v != 0.0) acc += c[positive_mod(n, period)] * v;
  }
  return std::sqrt(static_cast<double>(period)) * acc;
}

}  // namespace

double reconstruct_1d(const BasisTable& table, const WaveletCoeffs& coeffs, double x) {
  double acc = sum_level(table, BasisKind::scaling, coeffs.j_star(), coeffs.alpha, x);
  for (int j = coeffs.beta.first_level; j <= coeffs.beta.last_level(); ++j)
    acc += sum_level(table, BasisKind::wavelet, j, coeffs.beta.level(j), x);
  return acc;
}

double besov_seminorm(const DetailCoeffs& beta, double s, double p, double q, int R) {
  if (p < 1.0 || q < 1.0) throw InvalidArgument("besov_seminorm: need p >= 1 and q >= 1");
  if (!(s > 0.0) || !(s < static_cast<double>(R)))
    throw InvalidArgument("besov_seminorm: smoothness s must lie in (0, R)");
  double acc = 0.0;
  for (int j = beta.first_level; j <= beta.last_level(); ++j) {
    const double weight = std::exp2(j * (s + 0.5 - 1.0 / p));
    acc += std::pow(weight * lp_norm(beta.level(j), p), q);
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace addwav
