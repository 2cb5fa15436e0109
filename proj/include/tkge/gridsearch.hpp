#pragma once
// Hyperparameter grid search over the Cartesian product of value lists.
// Each point trains one model and is scored by validation filtered MRR.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "tkge/training.hpp"

namespace tkge {

struct GridSpec {
  std::vector<double> lrs = {0.01, 0.001, 0.0001};
  std::vector<int> n_negs = {10, 30, 40};
  std::vector<double> margins = {1, 5, 10, 20};
  std::vector<int> dims = {50, 100, 150, 200};
  std::vector<double> gammas = {0.1, 0.2};  // applied to de kinds only
  TrainConfig base;                         // batch size, epochs, seed, ...

  GridSpec() { base.batch_size = 2000; }

  std::vector<TrainConfig> configurations(ModelKind kind) const {
    if (lrs.empty() || n_negs.empty() || margins.empty() || dims.empty() ||
        (is_de_kind(kind) && gammas.empty())) {
      throw std::invalid_argument("grid has an empty dimension");
    }
    const std::vector<double> gamma_values =
        is_de_kind(kind) ? gammas : std::vector<double>{base.gamma};
    std::vector<TrainConfig> out;
    for (double lr : lrs) {
      for (int n_neg : n_negs) {
        for (double margin : margins) {
          for (int dim : dims) {
            for (double gamma : gamma_values) {
              TrainConfig c = base;
              c.lr = lr;
              c.n_neg = n_neg;
              c.margin = margin;
              c.dim = dim;
              c.gamma = gamma;
              out.push_back(c);
            }
          }
        }
      }
    }
    return out;
  }
};

struct GridEntry {
  TrainConfig config;
  double valid_mrr = 0.0;
  int epochs_run = 0;
  bool ok = false;
  std::string error;
};

// Trains every grid point and ranks by validation MRR (descending), ties
// broken by smaller dim then smaller lr. Failed points are recorded and
// sorted last instead of aborting the search.
template <class S>
std::vector<GridEntry> grid_search(const TemporalKG& kg, ModelKind kind,
                                   const GridSpec& grid,
                                   TeroNorm tero_norm = TeroNorm::L1,
                                   int n_threads = 0) {
  const auto configs = grid.configurations(kind);
  std::vector<GridEntry> entries;
  entries.reserve(configs.size());
  const ModelSizes sizes = Model<S>::sizes_from(kg);
  for (const auto& cfg : configs) {
    GridEntry entry;
    entry.config = cfg;
    try {
      ModelConfig mc{kind, cfg.dim, cfg.gamma, tero_norm};
      Model<S> model = Model<S>::init(mc, sizes, cfg.seed);
      TrainLog log = train(kg, model, cfg, n_threads);
      entry.epochs_run = static_cast<int>(log.epochs.size());
      if (log.diverged) {
        entry.error = "diverged";
      } else {
        entry.valid_mrr =
            kg.valid.empty()
                ? 0.0
                : evaluate(kg.valid, model, kg.filter, {1, 3, 10}, n_threads)
                      .mrr;
        entry.ok = true;
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const GridEntry& a, const GridEntry& b) {
                     if (a.ok != b.ok) return a.ok;
                     if (a.valid_mrr != b.valid_mrr)
                       return a.valid_mrr > b.valid_mrr;
                     if (a.config.dim != b.config.dim)
                       return a.config.dim < b.config.dim;
                     return a.config.lr < b.config.lr;
                   });
  return entries;
}

inline std::string grid_csv(const std::vector<GridEntry>& entries,
                            ModelKind kind) {
  std::ostringstream os;
  os << "rank,model,lr,n_neg,margin,dim,gamma,batch_size,epochs_run,"
        "valid_mrr,status,error\n";
  int rank = 1;
  for (const auto& e : entries) {
    std::string error = e.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    os << rank++ << ',' << model_kind_name(kind) << ',' << e.config.lr << ','
       << e.config.n_neg << ',' << e.config.margin << ',' << e.config.dim
       << ',';
    if (is_de_kind(kind)) os << e.config.gamma;
    os << ',' << e.config.batch_size << ',' << e.epochs_run << ','
       << e.valid_mrr << ',' << (e.ok ? "ok" : "failed") << ',' << error
       << '\n';
  }
  return os.str();
}

}  // namespace tkge
