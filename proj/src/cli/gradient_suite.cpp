#include "edgerec/cli/gradient_suite.hpp"

#include <cmath>
#include <type_traits>

#include "edgerec/gdit/model.hpp"
#include "edgerec/numeric/gradcheck.hpp"
#include "edgerec/numeric/ops.hpp"
#include "edgerec/train/loss.hpp"

namespace edgerec::cli {

namespace {

namespace nm = numeric;
using nm::Shape;
using nm::Tensor;
using nm::Var;

template <typename In>
using RealOf = typename std::decay_t<In>::value_type::value_type;

Tensor<double> random_tensor(Shape shape, Rng& rng, double sd = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = sd * standard_normal(rng);
  return t;
}

// Constants shared by the single and double paths are float-representable so
// both evaluate the same function.
Tensor<double> float_exact(const Tensor<double>& t) { return t.cast<float>().cast<double>(); }

// Contracts a tensor output with fixed random weights so no output symmetry
// (softmax rows sum to 1, layer-norm rows to 0) hides gradient errors.
template <typename Real>
Var<Real> project(const Var<Real>& out) {
  Rng rng = derive_rng(0x5eed, {out.value().size()});
  Tensor<double> w = float_exact(random_tensor(out.shape(), rng));
  return nm::sum(nm::mul(out, Var<Real>::constant(w.cast<Real>())));
}

template <typename F>
GradCaseResult run_case(const std::string& name, F fn, const std::vector<Tensor<double>>& point, std::uint64_t seed) {
  nm::ScalarFunction<double> as_double = [fn](const std::vector<Var<double>>& in) { return fn(in); };
  nm::ScalarFunction<float> as_single = [fn](const std::vector<Var<float>>& in) { return fn(in); };
  nm::GradCheckOptions options;
  options.directions = 6;
  GradCaseResult r;
  r.name = name;
  Rng a = derive_rng(seed, {1});
  r.error_double = nm::gradient_check(as_double, point, a, options);
  Rng b = derive_rng(seed, {2});
  r.error_single = nm::gradient_check_single(as_single, as_double, point, b, options);
  r.passed = r.error_double <= kGradTolDouble && r.error_single <= kGradTolSingle;
  return r;
}

template <typename Params>
std::vector<Tensor<double>> values_of(Params& params) {
  std::vector<Tensor<double>> out;
  params.visit("", [&](const std::string&, Var<double>& v) { out.push_back(v.value()); });
  return out;
}

// Rebinds every parameter of `params` to consecutive entries of `in` starting at `offset`.
template <typename Params, typename Real>
void bind(Params& params, const std::vector<Var<Real>>& in, std::size_t offset) {
  params.visit("", [&](const std::string&, Var<Real>& v) { v = in[offset++]; });
}

void append(std::vector<Tensor<double>>& to, const std::vector<Tensor<double>>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

std::vector<GradCaseResult> run_gradient_suite(std::uint64_t seed) {
  std::vector<GradCaseResult> results;
  Rng rng = derive_rng(seed, {0});
  std::uint64_t case_id = 0;
  auto add = [&](const std::string& name, auto fn, std::vector<Tensor<double>> point) {
    results.push_back(run_case(name, fn, point, seed * 1000 + ++case_id));
  };

  const Shape s{3, 4};
  add("add", [](const auto& in) { return project(nm::add(in[0], in[1])); },
      {random_tensor(s, rng), random_tensor(s, rng)});
  add("sub", [](const auto& in) { return project(nm::sub(in[0], in[1])); },
      {random_tensor(s, rng), random_tensor(s, rng)});
  add("mul", [](const auto& in) { return project(nm::mul(in[0], in[1])); },
      {random_tensor(s, rng), random_tensor(s, rng)});
  add("scale", [](const auto& in) { return project(nm::scale(in[0], RealOf<decltype(in)>(-1.75))); },
      {random_tensor(s, rng)});
  add("add_scalar", [](const auto& in) { return project(nm::mul(nm::add_scalar(in[0], RealOf<decltype(in)>(0.5)), in[0])); },
      {random_tensor(s, rng)});
  add("add_rowvec", [](const auto& in) { return project(nm::add_rowvec(in[0], in[1])); },
      {random_tensor({2, 3, 4}, rng), random_tensor({4}, rng)});
  add("mul_rowvec", [](const auto& in) { return project(nm::mul_rowvec(in[0], in[1])); },
      {random_tensor({2, 3, 4}, rng), random_tensor({4}, rng)});
  add("linear", [](const auto& in) { return project(nm::linear(in[0], in[1])); },
      {random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng)});
  add("linear_bias", [](const auto& in) { return project(nm::linear(in[0], in[1], in[2])); },
      {random_tensor({3, 4}, rng), random_tensor({4, 5}, rng), random_tensor({5}, rng)});
  add("matmul", [](const auto& in) { return project(nm::matmul(in[0], in[1])); },
      {random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 5}, rng)});
  add("matmul_nt", [](const auto& in) { return project(nm::matmul_nt(in[0], in[1])); },
      {random_tensor({2, 3, 4}, rng), random_tensor({2, 5, 4}, rng)});
  add("softmax", [](const auto& in) { return project(nm::softmax(in[0])); }, {random_tensor({3, 5}, rng, 2.0)});
  add("layer_norm", [](const auto& in) { return project(nm::layer_norm(in[0])); }, {random_tensor({3, 6}, rng)});
  add("layer_norm_affine", [](const auto& in) { return project(nm::layer_norm(in[0], in[1], in[2])); },
      {random_tensor({3, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)});
  add("gelu", [](const auto& in) { return project(nm::gelu(in[0])); }, {random_tensor(s, rng, 2.0)});
  add("silu", [](const auto& in) { return project(nm::silu(in[0])); }, {random_tensor(s, rng, 2.0)});
  add("log_sigmoid", [](const auto& in) { return project(nm::log_sigmoid(in[0])); }, {random_tensor(s, rng, 3.0)});
  add("clamp",
      [](const auto& in) {
        using Real = RealOf<decltype(in)>;
        return project(nm::clamp(in[0], Real(-1), Real(1)));
      },
      {Tensor<double>({6}, {-2.3, -1.4, -0.6, 0.1, 0.8, 1.7})});
  add("reshape", [](const auto& in) { return project(nm::reshape(in[0], {4, 3})); }, {random_tensor(s, rng)});
  add("permute", [](const auto& in) { return project(nm::permute(in[0], {2, 0, 1})); },
      {random_tensor({2, 3, 4}, rng)});
  add("slice_last", [](const auto& in) { return project(nm::slice_last(in[0], 1, 2)); }, {random_tensor(s, rng)});
  add("gather", [](const auto& in) { return project(nm::gather(in[0], {0, 5, 5, 11, 3})); }, {random_tensor(s, rng)});
  add("sum", [](const auto& in) { return nm::sum(nm::mul(in[0], in[0])); }, {random_tensor(s, rng)});
  add("mean", [](const auto& in) { return nm::mean(nm::mul(in[0], in[0])); }, {random_tensor(s, rng)});
  add("mean_square", [](const auto& in) { return nm::mean_square(in[0]); }, {random_tensor(s, rng)});
  add("masked_mean_square",
      [](const auto& in) {
        static const std::vector<std::uint8_t> mask{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0};
        return nm::masked_mean_square(in[0], std::span<const std::uint8_t>(mask));
      },
      {random_tensor(s, rng)});

  // Sub-layers.
  const std::size_t d = 8, heads = 2, n = 3, m = 4;
  add("multi_head_attention",
      [](const auto& in) { return project(gdit::multi_head_attention(in[0], in[1], in[2], 2)); },
      {random_tensor({2, 3, d}, rng), random_tensor({2, 5, d}, rng), random_tensor({2, 5, d}, rng)});

  {
    auto params = gdit::make_axial_attention<double>(d, rng);
    std::vector<Tensor<double>> point{random_tensor({n, m, d}, rng)};
    append(point, values_of(params));
    add("rcsa_self",
        [](const auto& in) {
          using Real = RealOf<decltype(in)>;
          Rng scratch(0);
          auto p = gdit::make_axial_attention<Real>(8, scratch);
          bind(p, in, 1);
          return project(gdit::rcsa_self(in[0], p, 2));
        },
        point);
  }
  {
    auto params = gdit::make_axial_attention<double>(d, rng);
    std::vector<Tensor<double>> point{random_tensor({n, m, d}, rng), random_tensor({n, d}, rng),
                                      random_tensor({m, d}, rng)};
    append(point, values_of(params));
    add("rcs_cross",
        [](const auto& in) {
          using Real = RealOf<decltype(in)>;
          Rng scratch(0);
          auto p = gdit::make_axial_attention<Real>(8, scratch);
          bind(p, in, 3);
          return project(gdit::rcs_cross(in[0], in[1], in[2], p, 2));
        },
        point);
  }
  {
    auto params = gdit::make_feature_encoder<double>(5, d, 4, rng);
    std::vector<Tensor<double>> point{random_tensor({n, 5}, rng)};
    append(point, values_of(params));
    add("feature_encoder",
        [](const auto& in) {
          using Real = RealOf<decltype(in)>;
          Rng scratch(0);
          auto p = gdit::make_feature_encoder<Real>(5, 8, 4, scratch);
          bind(p, in, 1);
          return project(gdit::encode_side(in[0], p, 2));
        },
        point);
  }
  {
    auto params = gdit::make_block<double>(d, 4, rng);
    // Nonzero modulation so every branch of the block carries gradient.
    params.modulation.weight.mutable_value() = random_tensor({d, 9 * d}, rng, 0.3);
    params.modulation.bias.mutable_value() = random_tensor({9 * d}, rng, 0.3);
    std::vector<Tensor<double>> point{random_tensor({n, m, d}, rng), random_tensor({d}, rng),
                                      random_tensor({n, d}, rng), random_tensor({m, d}, rng)};
    append(point, values_of(params));
    add("gdit_block",
        [](const auto& in) {
          using Real = RealOf<decltype(in)>;
          Rng scratch(0);
          auto p = gdit::make_block<Real>(8, 4, scratch);
          bind(p, in, 4);
          return project(gdit::gdit_block(in[0], in[1], in[2], in[3], p, 2));
        },
        point);
  }

  // Full model on a 4x4 patch.
  gdit::GDiTConfig config;
  config.d_model = d;
  config.n_heads = heads;
  config.n_blocks = 1;
  config.d_user_in = 3;
  config.d_item_in = 2;
  gdit::GDiTModel<double> model(config, rng);
  for (auto& block : model.blocks) {
    block.modulation.weight.mutable_value() = random_tensor({d, 9 * d}, rng, 0.3);
    block.modulation.bias.mutable_value() = random_tensor({9 * d}, rng, 0.3);
  }
  const Tensor<double> users = float_exact(random_tensor({4, 3}, rng));
  const Tensor<double> items = float_exact(random_tensor({4, 2}, rng));
  std::vector<Tensor<double>> point{random_tensor({4, 4}, rng)};
  model.visit([&](const std::string&, Var<double>& v) { point.push_back(v.value()); });

  auto model_fn = [config, users, items](const auto& in) {
    using Real = RealOf<decltype(in)>;
    Rng scratch(0);
    gdit::GDiTModel<Real> local(config, scratch);
    std::size_t k = 1;
    local.visit([&](const std::string&, Var<Real>& v) { v = in[k++]; });
    return local.forward(in[0], 137.0, users.cast<Real>(), items.cast<Real>());
  };
  add("model_forward", [model_fn](const auto& in) { return project(model_fn(in)); }, point);

  ingest::Patch patch;
  patch.n = patch.m = 4;
  patch.values = {1.0, 0.5, 0, -0.5, 0, -1.0, 0.25, 0, 0.75, 0, 0, -0.25, 0, 0.5, -0.75, 1.0};
  patch.known = {1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1};
  Tensor<double> eps = float_exact(random_tensor({4, 4}, rng));
  Tensor<double> x_t = float_exact(random_tensor({4, 4}, rng));
  auto schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  Rng pair_rng = derive_rng(seed, {3});
  auto pairs = train::sample_bpr_pairs(patch, 4, pair_rng);
  add("diffusion_loss",
      [model_fn, patch, eps, x_t, schedule, pairs](const auto& in) {
        using Real = RealOf<decltype(in)>;
        train::LossConfig loss;
        loss.bpr_weight = 0.5;
        loss.mask_unknown = true;
        // Large clamp range: the check must not straddle a clamp kink.
        loss.value_lo = -50;
        loss.value_hi = 50;
        auto eps_hat = model_fn(in);
        return train::diffusion_loss(eps.cast<Real>(), eps_hat, x_t.cast<Real>(), 60, patch, schedule, pairs, loss)
            .total;
      },
      point);
  return results;
}

}  // namespace edgerec::cli
