#include "edgerec/train/loss.hpp"

#include <algorithm>
#include <cmath>

#include "edgerec/common/error.hpp"
#include "edgerec/numeric/ops.hpp"

namespace edgerec::train {

namespace nm = numeric;

std::vector<BprPair> sample_bpr_pairs(const ingest::Patch& patch, std::size_t per_user, Rng& rng) {
  std::vector<BprPair> out;
  if (per_user == 0) return out;
  std::vector<BprPair> candidates;
  for (std::size_t r = 0; r < patch.n; ++r) {
    candidates.clear();
    const std::size_t base = r * patch.m;
    for (std::size_t a = 0; a < patch.m; ++a) {
      if (!patch.known[base + a]) continue;
      for (std::size_t b = 0; b < patch.m; ++b) {
        if (!patch.known[base + b]) continue;
        if (patch.values[base + a] > patch.values[base + b]) candidates.push_back({r, a, b});
      }
    }
    if (candidates.size() <= per_user) {
      out.insert(out.end(), candidates.begin(), candidates.end());
      continue;
    }
    // Partial Fisher-Yates.
    for (std::size_t k = 0; k < per_user; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
      std::swap(candidates[k], candidates[pick(rng)]);
      out.push_back(candidates[k]);
    }
  }
  return out;
}

template <typename Real>
LossTerms<Real> diffusion_loss(const Tensor<Real>& eps, const Var<Real>& eps_hat, const Tensor<Real>& x_t,
                               int t, const ingest::Patch& patch, const diffusion::NoiseSchedule& schedule,
                               const std::vector<BprPair>& pairs, const LossConfig& config) {
  const nm::Shape shape{patch.n, patch.m};
  if (eps.shape() != shape || eps_hat.shape() != shape || x_t.shape() != shape) {
    throw ShapeError("diffusion_loss: tensors must match the patch shape " + nm::shape_string(shape));
  }
  if (config.bpr_weight < 0) throw ParameterError("BPR weight must be non-negative");

  auto residual = nm::sub(eps_hat, Var<Real>::constant(eps));
  Var<Real> mse = config.mask_unknown ? nm::masked_mean_square(residual, std::span<const std::uint8_t>(patch.known))
                                      : nm::mean_square(residual);
  LossTerms<Real> terms;
  terms.mse = static_cast<double>(mse.value().item());
  if (config.bpr_weight == 0.0 || pairs.empty()) {
    terms.total = mse;
    return terms;
  }

  const double ab = schedule.alpha_bar(t);
  const double inv_root_ab = 1.0 / std::sqrt(ab);
  Tensor<Real> x_part(shape);
  for (std::size_t k = 0; k < x_part.size(); ++k) x_part[k] = static_cast<Real>(x_t[k] * inv_root_ab);
  auto x0_hat = nm::add(nm::scale(eps_hat, static_cast<Real>(-std::sqrt(1.0 - ab) * inv_root_ab)),
                        Var<Real>::constant(std::move(x_part)));
  x0_hat = nm::clamp(x0_hat, static_cast<Real>(config.value_lo), static_cast<Real>(config.value_hi));

  std::vector<std::size_t> pos, neg;
  pos.reserve(pairs.size());
  neg.reserve(pairs.size());
  for (const auto& p : pairs) {
    pos.push_back(p.row * patch.m + p.pos);
    neg.push_back(p.row * patch.m + p.neg);
  }
  auto margin = nm::sub(nm::gather(x0_hat, pos), nm::gather(x0_hat, neg));
  auto bpr = nm::scale(nm::mean(nm::log_sigmoid(margin)), Real(-1));
  terms.bpr = static_cast<double>(bpr.value().item());
  terms.total = nm::add(mse, nm::scale(bpr, static_cast<Real>(config.bpr_weight)));
  return terms;
}

template LossTerms<float> diffusion_loss<float>(const Tensor<float>&, const Var<float>&, const Tensor<float>&, int,
                                                const ingest::Patch&, const diffusion::NoiseSchedule&,
                                                const std::vector<BprPair>&, const LossConfig&);
template LossTerms<double> diffusion_loss<double>(const Tensor<double>&, const Var<double>&, const Tensor<double>&,
                                                  int, const ingest::Patch&, const diffusion::NoiseSchedule&,
                                                  const std::vector<BprPair>&, const LossConfig&);

}  // namespace edgerec::train
