#pragma once
// Temporal knowledge graph data model.
//
// A fact is a quadruple (head, relation, tail, timestamp). The graph owns
// the entity/relation vocabularies, the sorted timestamp list, the three
// splits, and the filter set used by ranked evaluation. Everything is
// immutable after construction; concurrent readers are safe.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "tkge/date.hpp"
#include "tkge/vocab.hpp"

namespace tkge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

// Fractional years between epoch and ts. Negative when ts precedes epoch;
// callers that care (forecast grids) warn on that themselves.
inline double timestamp_numeric(const Date& ts, const Date& epoch) {
  return static_cast<double>(day_serial(ts) - day_serial(epoch)) / 365.25;
}

struct Timestamp {
  Date date;
  double numeric = 0.0;  // fractional years since the dataset's minimum date
};

struct Quadruple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  Timestamp ts;
};

// --- date digit tokens ----------------------------------------------------
//
// A date maps to 8 tokens from a 30-symbol vocabulary: digits 0-9 tagged
// with a year/month/day suffix. Year digits come first, most significant
// digit first, then month and day, zero padded.

constexpr int kTemporalTokenCount = 30;
constexpr int kDateTokenLen = 8;
constexpr int kTokenSeqLen = 9;  // relation token + 8 date tokens

enum class DigitTag { Year = 0, Month = 1, Day = 2 };

constexpr int digit_token(int digit, DigitTag tag) {
  return static_cast<int>(tag) * 10 + digit;
}

inline std::array<int, kDateTokenLen> timestamp_tokens(const Date& d) {
  if (!is_valid_date(d)) {
    throw std::invalid_argument("timestamp_tokens: invalid date " +
                                format_date(d));
  }
  std::array<int, kDateTokenLen> out{};
  out[0] = digit_token(d.year / 1000, DigitTag::Year);
  out[1] = digit_token(d.year / 100 % 10, DigitTag::Year);
  out[2] = digit_token(d.year / 10 % 10, DigitTag::Year);
  out[3] = digit_token(d.year % 10, DigitTag::Year);
  out[4] = digit_token(d.month / 10, DigitTag::Month);
  out[5] = digit_token(d.month % 10, DigitTag::Month);
  out[6] = digit_token(d.day / 10, DigitTag::Day);
  out[7] = digit_token(d.day % 10, DigitTag::Day);
  return out;
}

// "2y", "0m", ... for diagnostics and tests.
inline std::string temporal_token_name(int token) {
  if (token < 0 || token >= kTemporalTokenCount) {
    throw std::out_of_range("temporal token " + std::to_string(token));
  }
  const char suffix[3] = {'y', 'm', 'd'};
  return std::to_string(token % 10) + suffix[token / 10];
}

// --- raw facts and interning ------------------------------------------------

struct RawQuadruple {
  std::string head;
  std::string relation;
  std::string tail;
  Date date;
};

// Assigns (or reuses) dense ids. The numeric part of the timestamp is filled
// in later, once the dataset's minimum date is known.
inline Quadruple intern_quadruple(Vocab& entities, Vocab& relations,
                                  const RawQuadruple& raw) {
  if (!is_valid_date(raw.date)) {
    throw std::invalid_argument("invalid date " + format_date(raw.date) +
                                " in fact (" + raw.head + ", " + raw.relation +
                                ", " + raw.tail + ")");
  }
  Quadruple q;
  q.head = entities.intern(raw.head);
  q.relation = relations.intern(raw.relation);
  q.tail = entities.intern(raw.tail);
  q.ts.date = raw.date;
  return q;
}

// --- filter index -----------------------------------------------------------

struct QuadKey {
  EntityId head;
  RelationId relation;
  EntityId tail;
  std::int64_t serial;

  friend bool operator==(const QuadKey&, const QuadKey&) = default;
};

struct QuadKeyHash {
  std::size_t operator()(const QuadKey& k) const {
    std::size_t h = std::hash<std::int64_t>{}(k.serial);
    auto mix = [&h](std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(std::hash<std::int32_t>{}(k.head));
    mix(std::hash<std::int32_t>{}(k.relation));
    mix(std::hash<std::int32_t>{}(k.tail));
    return h;
  }
};

inline QuadKey quad_key(const Quadruple& q) {
  return {q.head, q.relation, q.tail, day_serial(q.ts.date)};
}

// Exact membership over (h, r, t, timestamp) tuples.
class FilterIndex {
 public:
  void insert(const Quadruple& q) { keys_.insert(quad_key(q)); }

  bool contains(EntityId h, RelationId r, EntityId t,
                std::int64_t serial) const {
    return keys_.count({h, r, t, serial}) > 0;
  }

  bool contains(const Quadruple& q) const { return keys_.count(quad_key(q)) > 0; }

  std::size_t size() const { return keys_.size(); }

 private:
  std::unordered_set<QuadKey, QuadKeyHash> keys_;
};

inline FilterIndex build_filter_index(const std::vector<Quadruple>& train,
                                      const std::vector<Quadruple>& valid) {
  FilterIndex out;
  for (const auto& q : train) out.insert(q);
  std::vector<std::string> overlaps;
  for (const auto& q : valid) {
    if (out.contains(q)) {
      overlaps.push_back("(" + std::to_string(q.head) + ", " +
                         std::to_string(q.relation) + ", " +
                         std::to_string(q.tail) + ", " +
                         format_date(q.ts.date) + ")");
    }
  }
  if (!overlaps.empty()) {
    std::ostringstream msg;
    msg << "split overlap: " << overlaps.size()
        << " quadruple(s) appear in both train and valid:";
    for (const auto& s : overlaps) msg << ' ' << s;
    throw std::invalid_argument(msg.str());
  }
  for (const auto& q : valid) out.insert(q);
  return out;
}

// --- the graph --------------------------------------------------------------

struct KGOptions {
  bool filter_include_test = false;  // off: filter covers train + valid only
};

class TemporalKG {
 public:
  Vocab entities;
  Vocab relations;
  std::vector<Date> timestamps;  // sorted distinct dates across all splits
  Date epoch;                    // minimum date; numeric time zero point
  std::vector<Quadruple> train;
  std::vector<Quadruple> valid;
  std::vector<Quadruple> test;
  FilterIndex filter;
  std::map<std::int64_t, std::vector<Quadruple>> by_time;  // serial -> facts

  static TemporalKG from_raw(const std::vector<RawQuadruple>& raw_train,
                             const std::vector<RawQuadruple>& raw_valid,
                             const std::vector<RawQuadruple>& raw_test,
                             const KGOptions& options = {}) {
    TemporalKG kg;
    kg.train = kg.intern_split(raw_train);
    kg.valid = kg.intern_split(raw_valid);
    kg.test = kg.intern_split(raw_test);

    std::set<Date> dates;
    for (const auto* split : {&kg.train, &kg.valid, &kg.test}) {
      for (const auto& q : *split) dates.insert(q.ts.date);
    }
    kg.timestamps.assign(dates.begin(), dates.end());
    kg.epoch = kg.timestamps.empty() ? Date{} : kg.timestamps.front();

    for (auto* split : {&kg.train, &kg.valid, &kg.test}) {
      for (auto& q : *split) {
        q.ts.numeric = timestamp_numeric(q.ts.date, kg.epoch);
        kg.by_time[day_serial(q.ts.date)].push_back(q);
      }
    }

    kg.filter = build_filter_index(kg.train, kg.valid);
    if (options.filter_include_test) {
      for (const auto& q : kg.test) kg.filter.insert(q);
    }
    return kg;
  }

  // Day serials of timestamps occurring in the train split, sorted.
  std::vector<std::int64_t> train_time_serials() const {
    std::set<std::int64_t> serials;
    for (const auto& q : train) serials.insert(day_serial(q.ts.date));
    return {serials.begin(), serials.end()};
  }

  std::int64_t n_entities() const { return entities.size(); }
  std::int64_t n_relations() const { return relations.size(); }

 private:
  // Duplicates within one split are dropped, first occurrence wins.
  std::vector<Quadruple> intern_split(const std::vector<RawQuadruple>& raw) {
    std::vector<Quadruple> out;
    out.reserve(raw.size());
    std::unordered_set<QuadKey, QuadKeyHash> seen;
    for (const auto& rq : raw) {
      Quadruple q = intern_quadruple(entities, relations, rq);
      if (seen.insert(quad_key(q)).second) out.push_back(q);
    }
    return out;
  }
};

}  // namespace tkge
