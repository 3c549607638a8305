#include "dail/gradcheck.hpp"

#include <functional>
#include <map>
#include <span>

#include "dail/model.hpp"
#include "dail/numerics.hpp"
#include "dail/prng.hpp"
#include "dail/trainer.hpp"

namespace dail {

namespace {

struct Group {
  std::string name;
  std::vector<double>* values;          // flattened view into a params copy
  const std::vector<double>* analytic;  // matching gradient
};

/// Named flat views over every parameter group and its gradient.
std::vector<Group> param_groups(ModelParams& params, ModelGrads& grads) {
  std::vector<Group> groups;
  for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
    const std::string base = "embed." + std::to_string(l);
    groups.push_back({base + ".w", &params.embed_layers[l].w.data,
                      &grads.embed_layers[l].w.data});
    groups.push_back({base + ".b", &params.embed_layers[l].b,
                      &grads.embed_layers[l].b});
  }
  groups.push_back({"class.w", &params.class_w.data, &grads.class_w.data});
  if (!params.class_b.empty()) {
    groups.push_back({"class.b", &params.class_b, &grads.class_b});
  }
  if (params.has_domain_head()) {
    groups.push_back({"domain.w", &params.domain_w.data, &grads.domain_w.data});
    groups.push_back({"domain.b", &params.domain_b, &grads.domain_b});
  }
  return groups;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed) {
  constexpr double kH = 1e-6;
  constexpr std::size_t kInputDim = 3;
  constexpr std::size_t kEmbedDim = 2;
  constexpr std::size_t kNumClasses = 4;
  constexpr std::size_t kNumDatasets = 2;
  constexpr std::size_t kBatch = 3;

  const LossMode modes[] = {LossMode::naive, LossMode::dataset_aware,
                            LossMode::dataset_aware_grl,
                            LossMode::dataset_aware_grl_cd};
  const MarginSpec margins[] = {MarginSpec::linear(), MarginSpec::arcface(),
                                MarginSpec::combined(0.9, 0.4, 0.15)};

  // Classes 0,1 -> dataset 0; classes 2,3 -> dataset 1.
  const ClassTable table = build_class_table({{0, 0}, {1, 0}, {2, 1}, {3, 1}});

  std::map<std::string, double> worst;
  std::uint64_t combo_seed = seed;
  for (LossMode mode : modes) {
    for (const MarginSpec& margin : margins) {
      for (int stage : {1, 2}) {
        combo_seed++;
        Prng rng(mix_seed(combo_seed, 0x6C));

        Matrix x(kBatch, kInputDim);
        for (double& v : x.data) v = rng.gaussian();
        std::vector<std::size_t> targets, dataset_ids;
        for (std::size_t i = 0; i < kBatch; ++i) {
          targets.push_back(rng.below(kNumClasses));
          dataset_ids.push_back(table.dataset_of[targets.back()]);
        }

        const bool with_domain = mode == LossMode::dataset_aware_grl ||
                                 mode == LossMode::dataset_aware_grl_cd;
        ModelConfig config;
        config.input_dim = kInputDim;
        config.layer_dims = {4, kEmbedDim};
        config.num_classes = kNumClasses;
        config.num_datasets = kNumDatasets;
        config.margin = margin;
        config.lambda = 0.1;
        config.with_domain_head = with_domain;
        ModelParams params = init_params(config, combo_seed);

        // Masks are fixed inputs to the objective; a generous dropout
        // probability keeps some cross-dataset classes active.
        std::vector<std::vector<std::uint8_t>> masks;
        for (std::size_t i = 0; i < kBatch; ++i) {
          switch (mode) {
            case LossMode::naive:
              masks.emplace_back(kNumClasses, 1);
              break;
            case LossMode::dataset_aware:
            case LossMode::dataset_aware_grl:
              masks.push_back(dataset_mask(table, dataset_ids[i]));
              break;
            case LossMode::dataset_aware_grl_cd:
              masks.push_back(crossing_dropout_mask(table, dataset_ids[i], 0.5, rng));
              break;
          }
        }

        ForwardTrace trace = embed_forward(params, x);
        heads_forward(params, trace, targets);
        BackwardResult back =
            backward(params, trace, targets, dataset_ids, masks, stage);

        ModelParams probe = params;
        ModelGrads& grads = back.grads;
        for (Group& group : param_groups(probe, grads)) {
          const bool is_domain_group = group.name.rfind("domain.", 0) == 0;
          const auto objective = [&](std::span<const double> theta) {
            std::copy(theta.begin(), theta.end(), group.values->begin());
            ForwardTrace t = embed_forward(probe, x);
            heads_forward(probe, t, targets);
            const double cls =
                dataset_aware_loss(t.class_logits, targets, masks).loss;
            if (is_domain_group) {
              return domain_loss(t.domain_logits, dataset_ids).loss;
            }
            if (stage == 2 && probe.has_domain_head()) {
              return cls -
                     probe.lambda * domain_loss(t.domain_logits, dataset_ids).loss;
            }
            return cls;
          };

          const std::vector<double> saved = *group.values;
          const std::vector<double> fd = finite_diff_grad(objective, saved, kH);
          *group.values = saved;
          const double err = relative_error(*group.analytic, fd);
          auto [it, inserted] = worst.try_emplace(group.name, err);
          if (!inserted && err > it->second) it->second = err;
        }
      }
    }
  }

  std::vector<GradCheckResult> results;
  for (const auto& [name, err] : worst) results.push_back({name, err});
  return results;
}

}  // namespace dail
