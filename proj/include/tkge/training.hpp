#pragma once
// Training: uniform negative sampling, margin loss, Adam, the epoch loop.
//
// Each positive is corrupted n_neg times by replacing either the head or
// the tail (fair coin) with a uniformly random other entity. Accidental
// true facts are kept; they are rare and the cited sampling strategy
// allows them. The loss sums max(0, margin - f_pos + f_neg) over each
// positive and its own negatives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkge/core.hpp"
#include "tkge/evaluation.hpp"
#include "tkge/models.hpp"

namespace tkge {

struct TrainConfig {
  double lr = 0.001;
  int dim = 100;
  double margin = 1.0;
  int n_neg = 10;
  int batch_size = 2000;
  int n_epochs = 500;
  double gamma = 0.1;  // de kinds only
  std::uint64_t seed = 0;
  int patience = 20;   // validation evaluations without improvement
  int eval_every = 5;  // epochs between validation evaluations
  bool loss_mean = false;

  void validate() const {
    if (lr <= 0) throw std::invalid_argument("lr must be positive");
    if (dim < 1) throw std::invalid_argument("dim must be positive");
    if (margin <= 0) throw std::invalid_argument("margin must be positive");
    if (n_neg < 1) throw std::invalid_argument("n_neg must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
    if (n_epochs < 0) throw std::invalid_argument("n_epochs must be >= 0");
    if (gamma < 0 || gamma > 1) throw std::invalid_argument("gamma must be in [0,1]");
    if (patience < 1) throw std::invalid_argument("patience must be positive");
    if (eval_every < 1) throw std::invalid_argument("eval_every must be positive");
  }
};

inline std::vector<Quadruple> sample_negatives(const Quadruple& q, int n,
                                               std::int64_t n_entities,
                                               std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("need at least one negative");
  if (n_entities < 2) {
    throw std::invalid_argument(
        "negative sampling needs at least 2 entities, have " +
        std::to_string(n_entities));
  }
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<EntityId> pick(
      0, static_cast<EntityId>(n_entities) - 2);
  std::vector<Quadruple> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Quadruple neg = q;
    const bool corrupt_head = coin(rng) == 0;
    const EntityId original = corrupt_head ? q.head : q.tail;
    EntityId e = pick(rng);
    if (e >= original) ++e;  // uniform over entities != original
    (corrupt_head ? neg.head : neg.tail) = e;
    out.push_back(neg);
  }
  return out;
}

// Sum of margin violations; neg holds n scores per positive, grouped.
template <class S>
S triplet_loss(std::span<const S> pos_scores, std::span<const S> neg_scores,
               S margin) {
  if (pos_scores.empty() || neg_scores.size() % pos_scores.size() != 0) {
    throw std::invalid_argument("neg scores must group evenly per positive");
  }
  const std::size_t n = neg_scores.size() / pos_scores.size();
  S total = S(0);
  for (std::size_t i = 0; i < pos_scores.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      total += std::max(S(0), margin - pos_scores[i] + neg_scores[i * n + j]);
    }
  }
  return total;
}

template <class S>
struct AdamState {
  NamedTensors<S> m;
  NamedTensors<S> v;
  std::int64_t t = 0;
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);

  static AdamState like(const NamedTensors<S>& params) {
    AdamState s;
    s.m = NamedTensors<S>::zeros_like(params);
    s.v = NamedTensors<S>::zeros_like(params);
    return s;
  }
};

template <class S>
void adam_step(NamedTensors<S>& params, const NamedTensors<S>& grads,
               AdamState<S>& state, S lr) {
  state.t += 1;
  const S bc1 = S(1) - std::pow(state.beta1, S(state.t));
  const S bc2 = S(1) - std::pow(state.beta2, S(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, g] = grads.items()[i];
    if (!g.allFinite()) {
      throw std::runtime_error("non-finite gradient in tensor " + name);
    }
    auto& m = state.m.items()[i].second;
    auto& v = state.v.items()[i].second;
    auto& p = params.items()[i].second;
    m = state.beta1 * m + (S(1) - state.beta1) * g;
    v = (state.beta2 * v.array() +
         (S(1) - state.beta2) * g.array().square())
            .matrix();
    p.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
  }
}

// Loss plus d(loss)/d(params) for one batch. Positive i owns the negatives
// [i*n, (i+1)*n). For the ta kinds the LSTM runs once per (relation, date)
// group; negatives share the group of their positive by construction.
template <class S>
S batch_loss_and_grad(const Model<S>& model,
                      const std::vector<Quadruple>& positives,
                      const std::vector<Quadruple>& negatives, S margin,
                      NamedTensors<S>& grads, bool mean = false) {
  if (positives.empty() || negatives.size() % positives.size() != 0) {
    throw std::invalid_argument("negatives must group evenly per positive");
  }
  const std::size_t n_neg = negatives.size() / positives.size();
  const S scale =
      mean ? S(1) / S(positives.size() * n_neg) : S(1);

  if (is_ta_kind(model.cfg.kind)) {
    // group key: (relation, day serial); shared by a positive and its negatives
    std::map<std::pair<RelationId, std::int64_t>, std::vector<std::size_t>>
        groups;
    for (std::size_t i = 0; i < positives.size(); ++i) {
      groups[{positives[i].relation, day_serial(positives[i].ts.date)}]
          .push_back(i);
    }
    S total = S(0);
    for (const auto& [key, members] : groups) {
      const auto cache =
          model.ta_forward(key.first, positives[members.front()].ts.date);
      VecX<S> d_rseq = VecX<S>::Zero(model.cfg.dim);
      for (std::size_t i : members) {
        const S f_pos =
            model.ta_pair_score(cache, positives[i].head, positives[i].tail);
        S pos_coeff = S(0);
        for (std::size_t j = 0; j < n_neg; ++j) {
          const auto& neg = negatives[i * n_neg + j];
          const S f_neg = model.ta_pair_score(cache, neg.head, neg.tail);
          if (margin - f_pos + f_neg > S(0)) {
            total += margin - f_pos + f_neg;
            pos_coeff -= scale;
            model.ta_pair_backward(cache, neg.head, neg.tail, scale, grads,
                                   d_rseq);
          }
        }
        if (pos_coeff != S(0)) {
          model.ta_pair_backward(cache, positives[i].head, positives[i].tail,
                                 pos_coeff, grads, d_rseq);
        }
      }
      model.ta_backward(cache, d_rseq, grads);
    }
    return total * scale;
  }

  S total = S(0);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const S f_pos = model.score(positives[i]);
    S pos_coeff = S(0);
    for (std::size_t j = 0; j < n_neg; ++j) {
      const auto& neg = negatives[i * n_neg + j];
      const S f_neg = model.score(neg);
      if (margin - f_pos + f_neg > S(0)) {
        total += margin - f_pos + f_neg;
        pos_coeff -= scale;
        model.score_backward(neg, scale, grads);
      }
    }
    if (pos_coeff != S(0)) {
      model.score_backward(positives[i], pos_coeff, grads);
    }
  }
  return total * scale;
}

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;       // summed over the epoch
  double mean_loss = 0.0;  // per positive
  bool has_valid = false;
  double valid_mrr = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
  int best_epoch = -1;
  double best_valid_mrr = std::numeric_limits<double>::quiet_NaN();

  std::string to_jsonl() const {
    std::ostringstream os;
    for (const auto& e : epochs) {
      nlohmann::json j{
          {"epoch", e.epoch}, {"loss", e.loss}, {"mean_loss", e.mean_loss}};
      if (e.has_valid) j["valid_mrr"] = e.valid_mrr;
      os << j.dump() << '\n';
    }
    return os.str();
  }
};

// Mini-batch margin training with Adam. Keeps the parameters of the best
// validation MRR seen; early-stops after `patience` evaluations without
// improvement. On divergence (non-finite loss) the best finite parameters
// are restored and the log is marked.
template <class S>
TrainLog train(const TemporalKG& kg, Model<S>& model, const TrainConfig& cfg,
               int n_threads = 0) {
  cfg.validate();
  if (kg.train.empty()) {
    throw std::invalid_argument("train: empty train split");
  }

  AdamState<S> adam = AdamState<S>::like(model.params);
  NamedTensors<S> grads = NamedTensors<S>::zeros_like(model.params);
  // Distinct stream from parameter init, which consumed cfg.seed.
  std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ull);

  TrainLog log;
  NamedTensors<S> best_params = model.params;
  bool have_best = false;
  double best_mrr = -1.0;
  int evals_since_best = 0;
  NamedTensors<S> last_finite = model.params;

  std::vector<std::size_t> order(kg.train.size());
  std::iota(order.begin(), order.end(), 0);

  const std::int64_t n_entities = model.n_entities;
  bool stop = false;
  for (int epoch = 1; epoch <= cfg.n_epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size() && !stop;
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Quadruple> pos;
      pos.reserve(end - begin);
      std::vector<Quadruple> neg;
      neg.reserve((end - begin) * static_cast<std::size_t>(cfg.n_neg));
      for (std::size_t i = begin; i < end; ++i) {
        pos.push_back(kg.train[order[i]]);
        auto negs = sample_negatives(pos.back(), cfg.n_neg, n_entities, rng);
        neg.insert(neg.end(), negs.begin(), negs.end());
      }
      grads.set_zero();
      const S loss = batch_loss_and_grad(model, pos, neg, S(cfg.margin),
                                         grads, cfg.loss_mean);
      if (!std::isfinite(static_cast<double>(loss))) {
        log.diverged = true;
        stop = true;
        break;
      }
      adam_step(model.params, grads, adam, S(cfg.lr));
      model.project_constraints();
      epoch_loss += static_cast<double>(loss);
    }
    if (log.diverged) break;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_loss;
    rec.mean_loss = epoch_loss / static_cast<double>(kg.train.size());

    if (model.params.all_finite()) {
      last_finite = model.params;
    } else {
      log.diverged = true;
      log.epochs.push_back(rec);
      break;
    }

    if (!kg.valid.empty() && epoch % cfg.eval_every == 0) {
      const auto rep = evaluate(kg.valid, model, kg.filter, {1, 3, 10},
                                n_threads);
      rec.has_valid = true;
      rec.valid_mrr = rep.mrr;
      if (rep.mrr > best_mrr) {
        best_mrr = rep.mrr;
        best_params = model.params;
        have_best = true;
        log.best_epoch = epoch;
        evals_since_best = 0;
      } else if (++evals_since_best >= cfg.patience) {
        stop = true;
      }
    }
    log.epochs.push_back(rec);
  }

  if (log.diverged) {
    model.params = have_best ? best_params : last_finite;
  } else if (have_best) {
    model.params = best_params;
  }
  if (have_best) log.best_valid_mrr = best_mrr;
  return log;
}

}  // namespace tkge
