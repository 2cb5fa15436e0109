#pragma once
// Scoring models over temporal knowledge graphs.
//
// Seven kinds share one parameter container and one scoring interface:
//   transe / distmult          static baselines
//   de-transe / de-distmult    diachronic entity embeddings, static relations
//   ta-transe / ta-distmult    static entities, LSTM-encoded time-aware relations
//   tero                       complex embeddings, time as per-coordinate rotation
//
// Scores are plausibilities: higher means more plausible. Distance-based
// kinds return the negated (squared) distance so one margin loss fits all.
//
// A model resolves dates itself: fractional-year values come from its own
// epoch and, for tero, unseen dates map to the nearest training timestamp
// (ties to the earlier one). Scoring is read-only and thread-safe.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tkge/core.hpp"
#include "tkge/lstm.hpp"
#include "tkge/tensors.hpp"

namespace tkge {

enum class ModelKind {
  TransE,
  DistMult,
  DETransE,
  DEDistMult,
  TATransE,
  TADistMult,
  TeRo,
};

constexpr const char* kModelNames[] = {
    "transe", "distmult", "de-transe", "de-distmult",
    "ta-transe", "ta-distmult", "tero"};

inline std::string model_kind_name(ModelKind kind) {
  return kModelNames[static_cast<int>(kind)];
}

inline ModelKind parse_model_kind(const std::string& name) {
  for (int i = 0; i < 7; ++i) {
    if (name == kModelNames[i]) return static_cast<ModelKind>(i);
  }
  std::string valid;
  for (int i = 0; i < 7; ++i) {
    if (i) valid += ", ";
    valid += kModelNames[i];
  }
  throw std::invalid_argument("unknown model \"" + name + "\"; valid: " + valid);
}

constexpr bool is_de_kind(ModelKind k) {
  return k == ModelKind::DETransE || k == ModelKind::DEDistMult;
}
constexpr bool is_ta_kind(ModelKind k) {
  return k == ModelKind::TATransE || k == ModelKind::TADistMult;
}

enum class TeroNorm { L1, L2 };

struct ModelConfig {
  ModelKind kind = ModelKind::TransE;
  int dim = 100;
  double gamma = 0.1;  // share of diachronic coordinates, de kinds only
  TeroNorm tero_norm = TeroNorm::L1;
};

struct ModelSizes {
  int n_entities = 0;
  int n_relations = 0;
  std::vector<std::int64_t> time_serials;  // sorted train timestamps
  std::int64_t epoch_serial = 0;
};

// Rotates x coordinatewise by tau (the Hamiltonian product for diagonal
// complex matrices). Unit-modulus tau preserves each |x[k]|.
template <class S>
Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1> tero_time_rotate(
    const Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>& x,
    const Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>& tau) {
  if (x.size() != tau.size()) {
    throw std::invalid_argument("tero_time_rotate: size mismatch");
  }
  return x.cwiseProduct(tau);
}

template <class S>
class Model {
 public:
  ModelConfig cfg;
  int n_entities = 0;
  int n_relations = 0;
  int temporal_dim = 0;  // floor(gamma * dim), de kinds
  std::int64_t epoch_serial = 0;
  std::vector<std::int64_t> time_serials;
  NamedTensors<S> params;

  static ModelSizes sizes_from(const TemporalKG& kg) {
    ModelSizes s;
    s.n_entities = kg.entities.size();
    s.n_relations = kg.relations.size();
    s.time_serials = kg.train_time_serials();
    s.epoch_serial = day_serial(kg.epoch);
    return s;
  }

  static Model init(const ModelConfig& cfg, const ModelSizes& sizes,
                    std::uint64_t seed) {
    if (cfg.dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (sizes.n_entities < 1 || sizes.n_relations < 1) {
      throw std::invalid_argument("model needs at least one entity and relation");
    }
    Model m;
    m.cfg = cfg;
    m.n_entities = sizes.n_entities;
    m.n_relations = sizes.n_relations;
    m.epoch_serial = sizes.epoch_serial;
    m.time_serials = sizes.time_serials;

    const int d = cfg.dim;
    switch (cfg.kind) {
      case ModelKind::TransE:
      case ModelKind::DistMult:
        m.params.add("entity_emb", m.n_entities, d);
        m.params.add("relation_emb", m.n_relations, d);
        break;
      case ModelKind::DETransE:
      case ModelKind::DEDistMult: {
        if (cfg.gamma < 0.0 || cfg.gamma > 1.0) {
          throw std::invalid_argument("gamma must be in [0, 1]");
        }
        m.temporal_dim = static_cast<int>(std::floor(cfg.gamma * d + 1e-9));
        if (cfg.gamma > 0.0 && m.temporal_dim == 0) {
          throw std::invalid_argument(
              "gamma " + std::to_string(cfg.gamma) + " with dim " +
              std::to_string(d) + " leaves an empty temporal part");
        }
        m.params.add("entity_static", m.n_entities, d);
        m.params.add("entity_freq", m.n_entities, m.temporal_dim);
        m.params.add("entity_phase", m.n_entities, m.temporal_dim);
        m.params.add("relation_emb", m.n_relations, d);
        break;
      }
      case ModelKind::TATransE:
      case ModelKind::TADistMult:
        m.params.add("entity_emb", m.n_entities, d);
        m.params.add("token_emb", m.n_relations + kTemporalTokenCount, d);
        m.params.add("lstm_w_ih", 4 * d, d);
        m.params.add("lstm_w_hh", 4 * d, d);
        m.params.add("lstm_b_ih", 4 * d, 1);
        m.params.add("lstm_b_hh", 4 * d, 1);
        break;
      case ModelKind::TeRo:
        if (m.time_serials.empty()) {
          throw std::invalid_argument(
              "tero needs a non-empty training timestamp vocabulary");
        }
        m.params.add("entity_emb", m.n_entities, 2 * d);
        m.params.add("relation_emb", m.n_relations, 2 * d);
        m.params.add("time_emb",
                     static_cast<Eigen::Index>(m.time_serials.size()), 2 * d);
        break;
    }

    std::mt19937_64 rng(seed);
    for (auto& [name, tensor] : m.params.items()) {
      xavier_fill(tensor, rng);
    }
    if (is_ta_kind(cfg.kind)) {
      // Forget-gate bias starts at 1 so early training does not wipe state.
      m.params.at("lstm_b_ih").col(0).segment(d, d).setConstant(S(1));
    }
    m.project_constraints();
    return m;
  }

  int n_timestamps() const { return static_cast<int>(time_serials.size()); }

  // Fractional years between the model epoch and a date.
  S tau_of(const Date& date) const {
    return static_cast<S>(
        static_cast<double>(day_serial(date) - epoch_serial) / 365.25);
  }

  // Row of time_emb used for a date: exact match when the date is a training
  // timestamp, otherwise the nearest one by calendar distance, earlier on tie.
  Eigen::Index tero_time_row(const Date& date) const {
    if (time_serials.empty()) {
      throw std::out_of_range("model has no timestamp vocabulary");
    }
    const std::int64_t serial = day_serial(date);
    auto it = std::lower_bound(time_serials.begin(), time_serials.end(), serial);
    if (it == time_serials.end()) {
      return static_cast<Eigen::Index>(time_serials.size()) - 1;
    }
    if (it == time_serials.begin() || *it == serial) {
      return it - time_serials.begin();
    }
    auto prev = it - 1;
    const std::int64_t d_prev = serial - *prev;
    const std::int64_t d_next = *it - serial;
    return (d_prev <= d_next) ? prev - time_serials.begin()
                              : it - time_serials.begin();
  }

  bool date_in_time_vocab(const Date& date) const {
    return std::binary_search(time_serials.begin(), time_serials.end(),
                              day_serial(date));
  }

  // Diachronic entity embedding: the first temporal_dim coordinates are
  // amplitude * sin(freq * tau + phase), the rest are static.
  VecX<S> de_entity_embed(EntityId e, S tau) const {
    check_entity(e);
    const auto& a = params.at("entity_static");
    const auto& w = params.at("entity_freq");
    const auto& b = params.at("entity_phase");
    VecX<S> z = a.row(e).transpose();
    const int td = temporal_dim;
    if (td > 0) {
      z.segment(0, td) =
          (a.row(e).segment(0, td).transpose().array() *
           (w.row(e).transpose().array() * tau + b.row(e).transpose().array())
               .sin())
              .matrix();
    }
    return z;
  }

  // Time-aware relation embedding: last hidden state of the LSTM over the
  // relation token followed by the 8 date digit tokens.
  VecX<S> ta_relation_embed(RelationId r, const Date& date) const {
    return ta_forward(r, date).lstm.last_hidden();
  }

  struct TaCache {
    std::array<int, kTokenSeqLen> token_rows;
    LstmCache<S> lstm;
  };

  TaCache ta_forward(RelationId r, const Date& date) const {
    check_relation(r);
    TaCache cache;
    cache.token_rows[0] = r;
    const auto date_tokens = timestamp_tokens(date);
    for (int i = 0; i < kDateTokenLen; ++i) {
      cache.token_rows[i + 1] = n_relations + date_tokens[i];
    }
    const auto& tok = params.at("token_emb");
    std::vector<VecX<S>> inputs;
    inputs.reserve(kTokenSeqLen);
    for (int row : cache.token_rows) {
      inputs.push_back(tok.row(row).transpose());
    }
    cache.lstm =
        lstm_forward(params.at("lstm_w_ih"), params.at("lstm_w_hh"),
                     params.at("lstm_b_ih"), params.at("lstm_b_hh"), inputs);
    return cache;
  }

  void ta_backward(const TaCache& cache, const VecX<S>& d_rseq,
                   NamedTensors<S>& grads) const {
    std::vector<VecX<S>> d_inputs;
    lstm_backward(params.at("lstm_w_ih"), params.at("lstm_w_hh"), cache.lstm,
                  d_rseq, grads.at("lstm_w_ih"), grads.at("lstm_w_hh"),
                  grads.at("lstm_b_ih"), grads.at("lstm_b_hh"), d_inputs);
    auto& d_tok = grads.at("token_emb");
    for (int i = 0; i < kTokenSeqLen; ++i) {
      d_tok.row(cache.token_rows[i]) += d_inputs[i].transpose();
    }
  }

  // Score of one (head, tail) pair against an already-encoded relation
  // sequence. The trainer shares one TaCache across every quadruple of a
  // (relation, date) group.
  S ta_pair_score(const TaCache& cache, EntityId h, EntityId t) const {
    const VecX<S>& rseq = cache.lstm.last_hidden();
    const auto& e = params.at("entity_emb");
    if (cfg.kind == ModelKind::TATransE) {
      return -(e.row(h).transpose() + rseq - e.row(t).transpose())
                  .squaredNorm();
    }
    return (e.row(h).transpose().array() * rseq.array() *
            e.row(t).transpose().array())
        .sum();
  }

  // Entity-side gradients for a pair; the relation-sequence gradient is
  // accumulated into d_rseq for one deferred ta_backward per group.
  void ta_pair_backward(const TaCache& cache, EntityId h, EntityId t, S coeff,
                        NamedTensors<S>& grads, VecX<S>& d_rseq) const {
    const VecX<S>& rseq = cache.lstm.last_hidden();
    const auto& e = params.at("entity_emb");
    const VecX<S> hv = e.row(h).transpose();
    const VecX<S> tv = e.row(t).transpose();
    if (cfg.kind == ModelKind::TATransE) {
      const VecX<S> du = S(-2) * coeff * (hv + rseq - tv);
      grads.at("entity_emb").row(h) += du.transpose();
      grads.at("entity_emb").row(t) -= du.transpose();
      d_rseq += du;
    } else {
      grads.at("entity_emb").row(h) +=
          coeff * (rseq.array() * tv.array()).matrix().transpose();
      grads.at("entity_emb").row(t) +=
          coeff * (hv.array() * rseq.array()).matrix().transpose();
      d_rseq += coeff * (hv.array() * tv.array()).matrix();
    }
  }

  S score(const Quadruple& q) const {
    check_quadruple(q);
    switch (cfg.kind) {
      case ModelKind::TransE: {
        const auto& e = params.at("entity_emb");
        const auto& r = params.at("relation_emb");
        return -(e.row(q.head) + r.row(q.relation) - e.row(q.tail))
                    .squaredNorm();
      }
      case ModelKind::DistMult: {
        const auto& e = params.at("entity_emb");
        const auto& r = params.at("relation_emb");
        return (e.row(q.head).array() * r.row(q.relation).array() *
                e.row(q.tail).array())
            .sum();
      }
      case ModelKind::DETransE: {
        const S tau = tau_of(q.ts.date);
        const VecX<S> zh = de_entity_embed(q.head, tau);
        const VecX<S> zt = de_entity_embed(q.tail, tau);
        const auto& r = params.at("relation_emb");
        return -(zh + r.row(q.relation).transpose() - zt).squaredNorm();
      }
      case ModelKind::DEDistMult: {
        const S tau = tau_of(q.ts.date);
        const VecX<S> zh = de_entity_embed(q.head, tau);
        const VecX<S> zt = de_entity_embed(q.tail, tau);
        const auto& r = params.at("relation_emb");
        return (zh.array() * r.row(q.relation).transpose().array() * zt.array())
            .sum();
      }
      case ModelKind::TATransE:
      case ModelKind::TADistMult:
        return ta_pair_score(ta_forward(q.relation, q.ts.date), q.head,
                             q.tail);
      case ModelKind::TeRo:
        return tero_score(q);
    }
    throw std::logic_error("unreachable model kind");
  }

  // Elementwise-paired batch scoring. One side may have length 1, in which
  // case it is broadcast against the other.
  std::vector<S> score_batch(std::span<const EntityId> heads, RelationId r,
                             std::span<const EntityId> tails,
                             const Timestamp& ts) const {
    check_relation(r);
    const std::size_t n = std::max(heads.size(), tails.size());
    if (heads.size() != n && heads.size() != 1) {
      throw std::invalid_argument("score_batch: head/tail length mismatch");
    }
    if (tails.size() != n && tails.size() != 1) {
      throw std::invalid_argument("score_batch: head/tail length mismatch");
    }
    for (EntityId h : heads) check_entity(h);
    for (EntityId t : tails) check_entity(t);

    switch (cfg.kind) {
      case ModelKind::TransE:
      case ModelKind::DistMult: {
        const auto& e = params.at("entity_emb");
        const MatX<S> hm = gather_rows(e, heads, n);
        const MatX<S> tm = gather_rows(e, tails, n);
        const VecX<S> r_row =
            params.at("relation_emb").row(r).transpose();
        return pairwise_scores(cfg.kind == ModelKind::TransE, hm, r_row, tm);
      }
      case ModelKind::DETransE:
      case ModelKind::DEDistMult: {
        const S tau = tau_of(ts.date);
        const MatX<S> hm = de_embed_rows(heads, n, tau);
        const MatX<S> tm = de_embed_rows(tails, n, tau);
        const VecX<S> r_row =
            params.at("relation_emb").row(r).transpose();
        return pairwise_scores(cfg.kind == ModelKind::DETransE, hm, r_row, tm);
      }
      case ModelKind::TATransE:
      case ModelKind::TADistMult: {
        const auto& e = params.at("entity_emb");
        const MatX<S> hm = gather_rows(e, heads, n);
        const MatX<S> tm = gather_rows(e, tails, n);
        const VecX<S> rseq = ta_relation_embed(r, ts.date);
        return pairwise_scores(cfg.kind == ModelKind::TATransE, hm, rseq, tm);
      }
      case ModelKind::TeRo:
        return tero_score_batch(heads, r, tails, ts, n);
    }
    throw std::logic_error("unreachable model kind");
  }

  // Accumulates coeff * d(score)/d(params) into grads.
  void score_backward(const Quadruple& q, S coeff,
                      NamedTensors<S>& grads) const {
    check_quadruple(q);
    switch (cfg.kind) {
      case ModelKind::TransE: {
        const auto& e = params.at("entity_emb");
        const auto& r = params.at("relation_emb");
        const VecX<S> u = (e.row(q.head) + r.row(q.relation) - e.row(q.tail))
                              .transpose();
        const VecX<S> du = S(-2) * coeff * u;
        grads.at("entity_emb").row(q.head) += du.transpose();
        grads.at("relation_emb").row(q.relation) += du.transpose();
        grads.at("entity_emb").row(q.tail) -= du.transpose();
        break;
      }
      case ModelKind::DistMult: {
        const auto& e = params.at("entity_emb");
        const auto& r = params.at("relation_emb");
        grads.at("entity_emb").row(q.head) +=
            coeff * (r.row(q.relation).array() * e.row(q.tail).array()).matrix();
        grads.at("relation_emb").row(q.relation) +=
            coeff * (e.row(q.head).array() * e.row(q.tail).array()).matrix();
        grads.at("entity_emb").row(q.tail) +=
            coeff * (e.row(q.head).array() * r.row(q.relation).array()).matrix();
        break;
      }
      case ModelKind::DETransE:
      case ModelKind::DEDistMult: {
        const S tau = tau_of(q.ts.date);
        const VecX<S> zh = de_entity_embed(q.head, tau);
        const VecX<S> zt = de_entity_embed(q.tail, tau);
        const auto& r = params.at("relation_emb");
        const VecX<S> r_row = r.row(q.relation).transpose();
        VecX<S> dzh(cfg.dim), dzt(cfg.dim), dr(cfg.dim);
        if (cfg.kind == ModelKind::DETransE) {
          const VecX<S> du = S(-2) * coeff * (zh + r_row - zt);
          dzh = du;
          dr = du;
          dzt = -du;
        } else {
          dzh = coeff * (r_row.array() * zt.array()).matrix();
          dr = coeff * (zh.array() * zt.array()).matrix();
          dzt = coeff * (zh.array() * r_row.array()).matrix();
        }
        grads.at("relation_emb").row(q.relation) += dr.transpose();
        de_embed_backward(q.head, tau, dzh, grads);
        de_embed_backward(q.tail, tau, dzt, grads);
        break;
      }
      case ModelKind::TATransE:
      case ModelKind::TADistMult: {
        const TaCache cache = ta_forward(q.relation, q.ts.date);
        VecX<S> d_rseq = VecX<S>::Zero(cfg.dim);
        ta_pair_backward(cache, q.head, q.tail, coeff, grads, d_rseq);
        ta_backward(cache, d_rseq, grads);
        break;
      }
      case ModelKind::TeRo:
        tero_score_backward(q, coeff, grads);
        break;
    }
  }

  // Renormalizes each tero time-embedding coordinate to unit modulus.
  // No-op for the other kinds. Called after init and every optimizer step.
  void project_constraints() {
    if (cfg.kind != ModelKind::TeRo) return;
    auto& t = params.at("time_emb");
    const int d = cfg.dim;
    for (Eigen::Index row = 0; row < t.rows(); ++row) {
      for (int k = 0; k < d; ++k) {
        S re = t(row, k);
        S im = t(row, d + k);
        const S norm = std::sqrt(re * re + im * im);
        if (norm < S(1e-12)) {
          t(row, k) = S(1);
          t(row, d + k) = S(0);
        } else {
          t(row, k) = re / norm;
          t(row, d + k) = im / norm;
        }
      }
    }
  }

  void check_entity(EntityId e) const {
    if (e < 0 || e >= n_entities) {
      throw std::out_of_range("entity id " + std::to_string(e) +
                              " out of range [0, " +
                              std::to_string(n_entities) + ")");
    }
  }

  void check_relation(RelationId r) const {
    if (r < 0 || r >= n_relations) {
      throw std::out_of_range("relation id " + std::to_string(r) +
                              " out of range [0, " +
                              std::to_string(n_relations) + ")");
    }
  }

  void check_quadruple(const Quadruple& q) const {
    check_entity(q.head);
    check_entity(q.tail);
    check_relation(q.relation);
  }

 private:
  static MatX<S> gather_rows(const MatX<S>& src, std::span<const EntityId> ids,
                             std::size_t n) {
    MatX<S> out(n, src.cols());
    for (std::size_t i = 0; i < n; ++i) {
      out.row(static_cast<Eigen::Index>(i)) =
          src.row(ids[ids.size() == 1 ? 0 : i]);
    }
    return out;
  }

  MatX<S> de_embed_rows(std::span<const EntityId> ids, std::size_t n,
                        S tau) const {
    const auto& a = params.at("entity_static");
    const auto& w = params.at("entity_freq");
    const auto& b = params.at("entity_phase");
    MatX<S> out(n, cfg.dim);
    const int td = temporal_dim;
    for (std::size_t i = 0; i < n; ++i) {
      const EntityId e = ids[ids.size() == 1 ? 0 : i];
      auto row = out.row(static_cast<Eigen::Index>(i));
      row = a.row(e);
      if (td > 0) {
        row.segment(0, td) =
            (a.row(e).segment(0, td).array() *
             (w.row(e).array() * tau + b.row(e).array()).sin())
                .matrix();
      }
    }
    return out;
  }

  // TransE-style (negated squared L2) or DistMult-style (triple product)
  // scores for row-aligned head/tail matrices and a shared relation vector.
  static std::vector<S> pairwise_scores(bool translational, const MatX<S>& hm,
                                        const VecX<S>& r_row,
                                        const MatX<S>& tm) {
    std::vector<S> out(static_cast<std::size_t>(hm.rows()));
    if (translational) {
      MatX<S> diff = hm - tm;
      diff.rowwise() += r_row.transpose();
      for (Eigen::Index i = 0; i < diff.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = -diff.row(i).squaredNorm();
      }
    } else {
      const VecX<S> s = (hm.array() * tm.array()).matrix() * r_row;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        out[static_cast<std::size_t>(i)] = s(i);
      }
    }
    return out;
  }

  struct TeroParts {
    VecX<S> u_re;
    VecX<S> u_im;
  };

  struct TeroView {
    ArrX<S> h_re, h_im, t_re, t_im, tau_re, tau_im, r_re, r_im;
  };

  TeroView tero_view(const Quadruple& q) const {
    const auto& e = params.at("entity_emb");
    const auto& r = params.at("relation_emb");
    const auto& t = params.at("time_emb");
    const int d = cfg.dim;
    const Eigen::Index trow = tero_time_row(q.ts.date);
    TeroView v;
    v.h_re = e.row(q.head).segment(0, d).transpose();
    v.h_im = e.row(q.head).segment(d, d).transpose();
    v.t_re = e.row(q.tail).segment(0, d).transpose();
    v.t_im = e.row(q.tail).segment(d, d).transpose();
    v.tau_re = t.row(trow).segment(0, d).transpose();
    v.tau_im = t.row(trow).segment(d, d).transpose();
    v.r_re = r.row(q.relation).segment(0, d).transpose();
    v.r_im = r.row(q.relation).segment(d, d).transpose();
    return v;
  }

  TeroParts tero_parts(const TeroView& v) const {
    TeroParts p;
    // u = (h o tau) + r - conj(t o tau), per coordinate
    p.u_re = (v.h_re * v.tau_re - v.h_im * v.tau_im + v.r_re -
              v.t_re * v.tau_re + v.t_im * v.tau_im)
                 .matrix();
    p.u_im = (v.h_re * v.tau_im + v.h_im * v.tau_re + v.r_im +
              v.t_re * v.tau_im + v.t_im * v.tau_re)
                 .matrix();
    return p;
  }

  S tero_score(const Quadruple& q) const {
    const TeroParts p = tero_parts(tero_view(q));
    if (cfg.tero_norm == TeroNorm::L1) {
      return -(p.u_re.array().abs().sum() + p.u_im.array().abs().sum());
    }
    return -std::sqrt(p.u_re.squaredNorm() + p.u_im.squaredNorm());
  }

  std::vector<S> tero_score_batch(std::span<const EntityId> heads, RelationId r,
                                  std::span<const EntityId> tails,
                                  const Timestamp& ts, std::size_t n) const {
    const auto& e = params.at("entity_emb");
    const auto& rel = params.at("relation_emb");
    const auto& t = params.at("time_emb");
    const int d = cfg.dim;
    const Eigen::Index trow = tero_time_row(ts.date);

    const MatX<S> hm = gather_rows(e, heads, n);
    const MatX<S> tm = gather_rows(e, tails, n);
    using RowArr = Eigen::Array<S, 1, Eigen::Dynamic>;
    const RowArr tau_re = t.row(trow).segment(0, d);
    const RowArr tau_im = t.row(trow).segment(d, d);
    const RowArr r_re = rel.row(r).segment(0, d);
    const RowArr r_im = rel.row(r).segment(d, d);

    MatX<S> u_re = (hm.leftCols(d).array().rowwise() * tau_re -
                    hm.rightCols(d).array().rowwise() * tau_im -
                    tm.leftCols(d).array().rowwise() * tau_re +
                    tm.rightCols(d).array().rowwise() * tau_im)
                       .matrix();
    u_re.array().rowwise() += r_re;
    MatX<S> u_im = (hm.leftCols(d).array().rowwise() * tau_im +
                    hm.rightCols(d).array().rowwise() * tau_re +
                    tm.leftCols(d).array().rowwise() * tau_im +
                    tm.rightCols(d).array().rowwise() * tau_re)
                       .matrix();
    u_im.array().rowwise() += r_im;

    std::vector<S> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      if (cfg.tero_norm == TeroNorm::L1) {
        out[i] = -(u_re.row(row).array().abs().sum() +
                   u_im.row(row).array().abs().sum());
      } else {
        out[i] = -std::sqrt(u_re.row(row).squaredNorm() +
                            u_im.row(row).squaredNorm());
      }
    }
    return out;
  }

  void tero_score_backward(const Quadruple& q, S coeff,
                           NamedTensors<S>& grads) const {
    const int d = cfg.dim;
    const Eigen::Index trow = tero_time_row(q.ts.date);
    const TeroView v = tero_view(q);
    const TeroParts p = tero_parts(v);

    // d(score)/d(u), scaled by coeff
    ArrX<S> dre(d), dim(d);
    if (cfg.tero_norm == TeroNorm::L1) {
      dre = -coeff * p.u_re.array().sign();
      dim = -coeff * p.u_im.array().sign();
    } else {
      const S norm = std::sqrt(p.u_re.squaredNorm() + p.u_im.squaredNorm());
      if (norm == S(0)) return;
      dre = (-coeff / norm) * p.u_re.array();
      dim = (-coeff / norm) * p.u_im.array();
    }

    auto& ge = grads.at("entity_emb");
    auto& gr = grads.at("relation_emb");
    auto& gt = grads.at("time_emb");

    ge.row(q.head).segment(0, d) +=
        (dre * v.tau_re + dim * v.tau_im).matrix().transpose();
    ge.row(q.head).segment(d, d) +=
        (-dre * v.tau_im + dim * v.tau_re).matrix().transpose();
    ge.row(q.tail).segment(0, d) +=
        (-dre * v.tau_re + dim * v.tau_im).matrix().transpose();
    ge.row(q.tail).segment(d, d) +=
        (dre * v.tau_im + dim * v.tau_re).matrix().transpose();
    gr.row(q.relation).segment(0, d) += dre.matrix().transpose();
    gr.row(q.relation).segment(d, d) += dim.matrix().transpose();
    gt.row(trow).segment(0, d) +=
        (dre * (v.h_re - v.t_re) + dim * (v.h_im + v.t_im))
            .matrix()
            .transpose();
    gt.row(trow).segment(d, d) +=
        (dre * (v.t_im - v.h_im) + dim * (v.h_re + v.t_re))
            .matrix()
            .transpose();
  }

  void de_embed_backward(EntityId ent, S tau, const VecX<S>& dz,
                         NamedTensors<S>& grads) const {
    const auto& a = params.at("entity_static");
    const auto& w = params.at("entity_freq");
    const auto& b = params.at("entity_phase");
    auto& ga = grads.at("entity_static");
    const int td = temporal_dim;
    const int d = cfg.dim;
    if (td < d) {
      ga.row(ent).segment(td, d - td) += dz.segment(td, d - td).transpose();
    }
    if (td > 0) {
      const ArrX<S> arg = w.row(ent).transpose().array() * tau +
                          b.row(ent).transpose().array();
      const ArrX<S> cos_arg = arg.cos();
      const ArrX<S> amp = a.row(ent).segment(0, td).transpose();
      const ArrX<S> dzt = dz.segment(0, td);
      ga.row(ent).segment(0, td) +=
          (dzt * arg.sin()).matrix().transpose();
      grads.at("entity_freq").row(ent) +=
          (dzt * amp * cos_arg * tau).matrix().transpose();
      grads.at("entity_phase").row(ent) +=
          (dzt * amp * cos_arg).matrix().transpose();
    }
  }
};

}  // namespace tkge
