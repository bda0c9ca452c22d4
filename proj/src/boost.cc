// Copyright 2026 The Starlit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "starlit/boost.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace starlit::boost {
namespace {

using Int = __int128;

constexpr double kQuantScale = 1099511627776.0;  // 2^40
constexpr double kMinGain = 1e-9;

struct Hist {
  std::vector<Int> g, h;
};

void require_binary(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
    (y == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw ConfigError("labels contain a single class");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> row_of(const Eigen::MatrixXd& x, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) out[c] = x(r, c);
  return out;
}

// One party's view of the split search.
class HistogramProvider {
 public:
  virtual ~HistogramProvider() = default;
  virtual Party party() const = 0;
  virtual std::vector<Hist> histograms(const std::vector<std::uint32_t>& sampled) = 0;
  virtual std::vector<std::uint8_t> partition(int feature, int bin,
                                              const std::vector<std::uint32_t>& rows) = 0;
};

class LocalProvider : public HistogramProvider {
 public:
  LocalProvider(Party party, const FeatureCuts& cuts, const BinMatrix& bins,
                const std::vector<std::int64_t>& gq, const std::vector<std::int64_t>& hq)
      : party_(party), cuts_(cuts), bins_(bins), gq_(gq), hq_(hq) {}

  Party party() const override { return party_; }

  std::vector<Hist> histograms(const std::vector<std::uint32_t>& sampled) override {
    std::vector<Hist> out(bins_.size());
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      int nb = cuts_.n_bins(static_cast<int>(f));
      out[f].g.assign(nb, 0);
      out[f].h.assign(nb, 0);
      const auto& col = bins_[f];
      for (std::uint32_t r : sampled) {
        out[f].g[col[r]] += gq_[r];
        out[f].h[col[r]] += hq_[r];
      }
    }
    return out;
  }

  std::vector<std::uint8_t> partition(int feature, int bin,
                                      const std::vector<std::uint32_t>& rows) override {
    std::vector<std::uint8_t> left(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) left[i] = bins_[feature][rows[i]] <= bin;
    return left;
  }

 private:
  Party party_;
  const FeatureCuts& cuts_;
  const BinMatrix& bins_;
  const std::vector<std::int64_t>& gq_;
  const std::vector<std::int64_t>& hq_;
};

void put_rows(ByteWriter& w, const std::vector<std::uint32_t>& rows) {
  w.put_u32(static_cast<std::uint32_t>(rows.size()));
  for (std::uint32_t r : rows) w.put_u32(r);
}

std::vector<std::uint32_t> get_rows(ByteReader& r, std::size_t n_rows) {
  std::uint32_t count = r.get_u32();
  std::vector<std::uint32_t> rows(count);
  for (auto& v : rows) {
    v = r.get_u32();
    if (v >= n_rows) throw ProtocolError("row index out of range");
  }
  return rows;
}

void put_mpz(ByteWriter& w, const mpz_class& v) {
  std::size_t count = 0;
  Bytes buf((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  mpz_export(buf.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  buf.resize(count);
  w.put_u32(static_cast<std::uint32_t>(buf.size()));
  w.put_raw(buf);
}

mpz_class get_mpz(ByteReader& r) {
  std::uint32_t len = r.get_u32();
  auto raw = r.get_raw(len);
  mpz_class v;
  mpz_import(v.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
  return v;
}

class RemoteProvider : public HistogramProvider {
 public:
  RemoteProvider(PassiveChannel& channel, const he::PaillierKeypair& keys)
      : channel_(channel), keys_(keys), codec_(keys.public_key.n()) {}

  Party party() const override { return Party::kFc; }

  void setup(const std::vector<std::string>& ids) {
    ByteWriter w;
    put_mpz(w, keys_.public_key.n());
    w.put_u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto& id : ids) w.put_string(id);
    Bytes resp = channel_.exchange(TrainingMessage::kSetup, w.take());
    ByteReader r(resp);
    n_bins_.resize(r.get_u32());
    for (auto& nb : n_bins_) nb = static_cast<int>(r.get_u32());
    if (!r.done()) throw ProtocolError("trailing bytes in setup response");
  }

  void send_gradients(int tree, const RowSample& sample, const std::vector<std::int64_t>& gq,
                      const std::vector<std::int64_t>& hq, he::RandomStream& rng) {
    const auto& priv = *keys_.private_key;
    const auto& pub = keys_.public_key;
    ByteWriter w;
    w.put_u32(static_cast<std::uint32_t>(tree));
    w.put_u32(static_cast<std::uint32_t>(sample.indices.size()));
    for (std::uint32_t row : sample.indices) {
      w.put_u32(row);
      w.put_raw(pub.serialize(priv.encrypt(codec_.encode_raw(gq[row]), rng)));
      w.put_raw(pub.serialize(priv.encrypt(codec_.encode_raw(hq[row]), rng)));
    }
    Bytes resp = channel_.exchange(TrainingMessage::kEncryptedGradients, w.take());
    if (!resp.empty()) throw ProtocolError("unexpected gradient acknowledgement");
  }

  std::vector<Hist> histograms(const std::vector<std::uint32_t>& sampled) override {
    ByteWriter w;
    put_rows(w, sampled);
    Bytes resp = channel_.exchange(TrainingMessage::kHistogramRequest, w.take());
    ByteReader r(resp);
    const auto& pub = keys_.public_key;
    std::size_t width = pub.ciphertext_bytes();
    std::uint32_t n_features = r.get_u32();
    if (n_features != n_bins_.size()) throw ProtocolError("histogram feature count mismatch");
    std::vector<Hist> out(n_features);
    for (std::uint32_t f = 0; f < n_features; ++f) {
      std::uint32_t nb = r.get_u32();
      if (static_cast<int>(nb) != n_bins_[f]) throw ProtocolError("histogram bin count mismatch");
      out[f].g.resize(nb);
      out[f].h.resize(nb);
      for (std::uint32_t b = 0; b < nb; ++b) {
        out[f].g[b] = codec_.decode_raw(keys_.private_key->decrypt(pub.deserialize(r.get_raw(width))));
        out[f].h[b] = codec_.decode_raw(keys_.private_key->decrypt(pub.deserialize(r.get_raw(width))));
      }
    }
    if (!r.done()) throw ProtocolError("trailing bytes in histogram response");
    return out;
  }

  std::vector<std::uint8_t> partition(int feature, int bin,
                                      const std::vector<std::uint32_t>& rows) override {
    ByteWriter w;
    w.put_u32(static_cast<std::uint32_t>(feature));
    w.put_u32(static_cast<std::uint32_t>(bin));
    put_rows(w, rows);
    Bytes resp = channel_.exchange(TrainingMessage::kSplitDecision, w.take());
    ByteReader r(resp);
    std::uint32_t count = r.get_u32();
    if (count != rows.size()) throw ProtocolError("partition size mismatch");
    auto packed = r.get_raw((count + 7) / 8);
    if (!r.done()) throw ProtocolError("trailing bytes in partition response");
    std::vector<std::uint8_t> left(count);
    for (std::uint32_t i = 0; i < count; ++i) left[i] = (packed[i / 8] >> (i % 8)) & 1;
    return left;
  }

 private:
  PassiveChannel& channel_;
  const he::PaillierKeypair& keys_;
  he::FixedPointCodec codec_;
  std::vector<int> n_bins_;
};

class Grower {
 public:
  Grower(const BoostParams& params, std::vector<HistogramProvider*> providers,
         const std::vector<std::int64_t>& gq, const std::vector<std::int64_t>& hq,
         std::vector<double>& row_value)
      : params_(params), providers_(std::move(providers)), gq_(gq), hq_(hq),
        row_value_(row_value), mark_(row_value.size(), 0) {}

  Tree grow(const std::vector<std::uint32_t>& rows, const std::vector<std::uint32_t>& sampled) {
    tree_ = Tree{};
    grow_node(rows, sampled, 0);
    return std::move(tree_);
  }

 private:
  int grow_node(const std::vector<std::uint32_t>& rows, const std::vector<std::uint32_t>& sampled,
                int depth) {
    Int g_sum = 0, h_sum = 0;
    for (std::uint32_t r : sampled) {
      g_sum += gq_[r];
      h_sum += hq_[r];
    }
    int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    if (depth < params_.max_depth && !sampled.empty()) {
      double best = -std::numeric_limits<double>::infinity();
      HistogramProvider* owner = nullptr;
      int best_feature = -1, best_bin = -1;
      for (HistogramProvider* p : providers_) {
        std::vector<Hist> hists = p->histograms(sampled);
        for (std::size_t f = 0; f < hists.size(); ++f) {
          Int gl = 0, hl = 0;
          for (std::size_t b = 0; b + 1 < hists[f].g.size(); ++b) {
            gl += hists[f].g[b];
            hl += hists[f].h[b];
            double dhl = dequantize(hl), dhr = dequantize(h_sum - hl);
            if (dhl < params_.min_child_weight || dhr < params_.min_child_weight) continue;
            double gain = split_gain(dequantize(gl), dhl, dequantize(g_sum - gl), dhr,
                                     params_.lambda_l2, params_.gamma);
            if (gain > kMinGain && gain > best) {
              best = gain;
              owner = p;
              best_feature = static_cast<int>(f);
              best_bin = static_cast<int>(b);
            }
          }
        }
      }
      if (owner != nullptr) {
        std::vector<std::uint8_t> left = owner->partition(best_feature, best_bin, rows);
        if (left.size() != rows.size()) throw ProtocolError("partition size mismatch");
        std::vector<std::uint32_t> lrows, rrows, lsamp, rsamp;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          mark_[rows[i]] = left[i];
          (left[i] ? lrows : rrows).push_back(rows[i]);
        }
        for (std::uint32_t r : sampled) (mark_[r] ? lsamp : rsamp).push_back(r);
        int l = grow_node(lrows, lsamp, depth + 1);
        int r = grow_node(rrows, rsamp, depth + 1);
        TreeNode& node = tree_.nodes[id];
        node.is_leaf = false;
        node.party = owner->party();
        node.feature = best_feature;
        node.bin = best_bin;
        node.left = l;
        node.right = r;
        return id;
      }
    }

    double denom = dequantize(h_sum) + params_.lambda_l2;
    double w = denom > 0 ? -dequantize(g_sum) / denom : 0.0;
    tree_.nodes[id].weight = w;
    for (std::uint32_t r : rows) row_value_[r] = w;
    return id;
  }

  const BoostParams& params_;
  std::vector<HistogramProvider*> providers_;
  const std::vector<std::int64_t>& gq_;
  const std::vector<std::int64_t>& hq_;
  std::vector<double>& row_value_;
  std::vector<std::uint8_t> mark_;
  Tree tree_;
};

using TreeHook = std::function<void(int tree, const RowSample& sample,
                                    const std::vector<std::int64_t>& gq,
                                    const std::vector<std::int64_t>& hq)>;

// Boosting loop shared by both trainers; only the providers differ.
Model boost_loop(std::span<const int> labels, const BoostParams& params,
                 const std::vector<HistogramProvider*>& providers,
                 std::vector<std::int64_t>& gq, std::vector<std::int64_t>& hq,
                 const TreeHook& before_tree) {
  const std::size_t n = labels.size();
  Model m;
  m.base_score = base_log_odds(labels);
  m.learning_rate = params.learning_rate;
  std::vector<double> scores(n, m.base_score);
  std::vector<double> row_value(n, 0.0);
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);

  for (int t = 0; t < params.n_trees; ++t) {
    GradHess gh = logistic_grad_hess(labels, scores);
    RowSample sample = sample_rows(gh.g, params, t);
    std::fill(gq.begin(), gq.end(), 0);
    std::fill(hq.begin(), hq.end(), 0);
    for (std::size_t k = 0; k < sample.indices.size(); ++k) {
      std::uint32_t r = sample.indices[k];
      gq[r] = quantize(gh.g[r] * sample.weights[k]);
      hq[r] = quantize(gh.h[r] * sample.weights[k]);
    }
    if (before_tree) before_tree(t, sample, gq, hq);
    Grower grower(params, providers, gq, hq, row_value);
    m.trees.push_back(grower.grow(all_rows, sample.indices));
    for (std::size_t i = 0; i < n; ++i) scores[i] += m.learning_rate * row_value[i];
  }
  return m;
}

const TreeNode& walk_to_leaf(const Model& m, const Tree& t, std::span<const double> srv_row,
                             std::span<const double> fc_row) {
  const TreeNode* node = &t.nodes.at(0);
  while (!node->is_leaf) {
    bool left;
    const FeatureCuts& cuts = m.cuts[static_cast<int>(node->party)];
    if (node->party == Party::kFc) {
      if (fc_row.empty() || cuts.n_features() == 0) {
        throw ConfigError("model has FC-owned splits; FC features and cuts are required");
      }
      left = fc_row[node->feature] <= cuts.threshold(node->feature, node->bin);
    } else {
      left = srv_row[node->feature] <= cuts.threshold(node->feature, node->bin);
    }
    node = &t.nodes.at(left ? node->left : node->right);
  }
  return *node;
}

}  // namespace

void BoostParams::validate() const {
  if (n_trees < 0) throw ConfigError("boost.n_trees must be non-negative");
  if (max_depth < 1) throw ConfigError("boost.max_depth must be positive");
  if (!(lambda_l2 >= 0)) throw ConfigError("boost.lambda_l2 must be non-negative");
  if (!(gamma >= 0)) throw ConfigError("boost.gamma must be non-negative");
  if (!(learning_rate > 0 && learning_rate <= 1)) {
    throw ConfigError("boost.learning_rate must lie in (0, 1]");
  }
  if (!(direct_sampling_rate > 0 && direct_sampling_rate <= 1)) {
    throw ConfigError("boost.direct_sampling_rate must lie in (0, 1]");
  }
  if (goss) {
    if (!(goss->top_rate > 0 && goss->top_rate <= 1)) {
      throw ConfigError("boost.goss_top_rate must lie in (0, 1]");
    }
    if (!(goss->other_rate >= 0 && goss->top_rate + goss->other_rate <= 1 + 1e-12)) {
      throw ConfigError("boost.goss_other_rate must be >= 0 with top + other <= 1");
    }
  }
  if (n_bins < 2 || n_bins > 255) throw ConfigError("boost.n_bins must lie in [2, 255]");
  if (!(min_child_weight >= 0)) throw ConfigError("boost.min_child_weight must be non-negative");
}

std::string_view party_name(Party p) { return p == Party::kSrv ? "srv" : "fc"; }

FeatureCuts FeatureCuts::fit(const Eigen::MatrixXd& x, int n_bins) {
  if (n_bins < 2 || n_bins > 255) throw ConfigError("n_bins must lie in [2, 255]");
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(x.cols()));
  const std::size_t n = static_cast<std::size_t>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::vector<double> v(x.col(c).data(), x.col(c).data() + n);
    for (double e : v) {
      if (!std::isfinite(e)) throw ConfigError("non-finite feature value");
    }
    std::sort(v.begin(), v.end());
    std::vector<double> uniq = v;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto& out = cuts[c];
    if (uniq.size() <= static_cast<std::size_t>(n_bins)) {
      if (!uniq.empty()) out.assign(uniq.begin(), uniq.end() - 1);
      continue;
    }
    for (int k = 1; k < n_bins; ++k) {
      std::size_t pos = (static_cast<std::size_t>(k) * n + n_bins - 1) / n_bins;
      double cut = v[pos - 1];
      if (cut < v.back() && (out.empty() || cut > out.back())) out.push_back(cut);
    }
  }
  return FeatureCuts(std::move(cuts));
}

int FeatureCuts::bin(int feature, double value) const {
  const auto& c = cuts_[feature];
  return static_cast<int>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
}

BinMatrix bin_matrix(const FeatureCuts& cuts, const Eigen::MatrixXd& x) {
  if (x.cols() != cuts.n_features()) throw ConfigError("feature count does not match cuts");
  BinMatrix out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out[c].resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out[c][r] = static_cast<std::uint8_t>(cuts.bin(static_cast<int>(c), x(r, c)));
    }
  }
  return out;
}

int Tree::depth() const {
  std::function<int(int)> rec = [&](int id) -> int {
    const TreeNode& n = nodes.at(id);
    return n.is_leaf ? 0 : 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes.empty() ? 0 : rec(0);
}

bool Model::has_fc_splits() const {
  for (const auto& t : trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf && n.party == Party::kFc) return true;
    }
  }
  return false;
}

double tree_value(const Model& m, const Tree& t, std::span<const double> srv_row,
                  std::span<const double> fc_row) {
  return walk_to_leaf(m, t, srv_row, fc_row).weight;
}

double predict_margin(const Model& m, std::span<const double> srv_row,
                      std::span<const double> fc_row) {
  double score = m.base_score;
  for (const auto& t : m.trees) score += m.learning_rate * tree_value(m, t, srv_row, fc_row);
  return score;
}

double predict(const Model& m, std::span<const double> srv_row, std::span<const double> fc_row) {
  return sigmoid(predict_margin(m, srv_row, fc_row));
}

Eigen::VectorXd predict(const Model& m, const Eigen::MatrixXd& srv, const Eigen::MatrixXd& fc) {
  if (fc.cols() > 0 && fc.rows() != srv.rows()) throw ConfigError("row count mismatch");
  Eigen::VectorXd out(srv.rows());
  for (Eigen::Index r = 0; r < srv.rows(); ++r) {
    std::vector<double> s = row_of(srv, r);
    std::vector<double> f = fc.cols() > 0 ? row_of(fc, r) : std::vector<double>{};
    out[r] = predict(m, s, f);
  }
  return out;
}

std::vector<FcNodeRef> fc_nodes(const Model& m) {
  std::vector<FcNodeRef> refs;
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const auto& nodes = m.trees[t].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].is_leaf && nodes[i].party == Party::kFc) {
        refs.push_back({static_cast<int>(t), static_cast<int>(i), nodes[i].feature, nodes[i].bin});
      }
    }
  }
  return refs;
}

std::vector<std::vector<std::uint8_t>> evaluate_fc_nodes(const FeatureCuts& fc_cuts,
                                                         const std::vector<FcNodeRef>& refs,
                                                         const Eigen::MatrixXd& fc) {
  std::vector<std::vector<std::uint8_t>> bits(refs.size());
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const auto& ref = refs[k];
    if (ref.feature < 0 || ref.feature >= fc_cuts.n_features() || ref.bin < 0 ||
        ref.bin + 1 >= fc_cuts.n_bins(ref.feature)) {
      throw ProtocolError("inference request names an unknown split");
    }
    double threshold = fc_cuts.threshold(ref.feature, ref.bin);
    bits[k].resize(static_cast<std::size_t>(fc.rows()));
    for (Eigen::Index r = 0; r < fc.rows(); ++r) bits[k][r] = fc(r, ref.feature) <= threshold;
  }
  return bits;
}

Eigen::VectorXd predict_with_fc_bits(const Model& m, const Eigen::MatrixXd& srv,
                                     const std::vector<FcNodeRef>& refs,
                                     const std::vector<std::vector<std::uint8_t>>& bits) {
  std::map<std::pair<int, int>, std::size_t> index;
  for (std::size_t k = 0; k < refs.size(); ++k) index[{refs[k].tree, refs[k].node}] = k;
  Eigen::VectorXd out(srv.rows());
  for (Eigen::Index r = 0; r < srv.rows(); ++r) {
    double score = m.base_score;
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
      const auto& nodes = m.trees[t].nodes;
      const TreeNode* node = &nodes.at(0);
      int id = 0;
      while (!node->is_leaf) {
        bool left;
        if (node->party == Party::kFc) {
          auto it = index.find({static_cast<int>(t), id});
          if (it == index.end() || bits[it->second].size() != static_cast<std::size_t>(srv.rows())) {
            throw ProtocolError("missing FC decision for an FC-owned split");
          }
          left = bits[it->second][r] != 0;
        } else {
          left = srv(r, node->feature) <= m.cuts[0].threshold(node->feature, node->bin);
        }
        id = left ? node->left : node->right;
        node = &nodes.at(id);
      }
      score += m.learning_rate * node->weight;
    }
    out[r] = sigmoid(score);
  }
  return out;
}

void save_model(const Model& m, std::ostream& out) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "starlit-gbt 1\n";
  out << "base_score " << num(m.base_score) << "\n";
  out << "learning_rate " << num(m.learning_rate) << "\n";
  out << "trees " << m.trees.size() << "\n";
  for (const auto& t : m.trees) {
    out << "tree " << t.nodes.size() << "\n";
    for (const auto& n : t.nodes) {
      if (n.is_leaf) {
        out << "leaf " << num(n.weight) << "\n";
      } else {
        out << "split " << party_name(n.party) << " " << n.feature << " " << n.bin << " "
            << n.left << " " << n.right << "\n";
      }
    }
  }
  for (int p = 0; p < 2; ++p) {
    const auto& cuts = m.cuts[p].cuts();
    out << "cuts " << party_name(static_cast<Party>(p)) << " " << cuts.size() << "\n";
    for (const auto& c : cuts) {
      out << c.size();
      for (double v : c) out << " " << num(v);
      out << "\n";
    }
  }
}

Model load_model(std::istream& in) {
  auto fail = [](const std::string& what) -> void { throw ParseError("model file: " + what); };
  auto expect = [&](const char* word) {
    std::string w;
    if (!(in >> w) || w != word) fail(std::string("expected '") + word + "'");
  };
  Model m;
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "starlit-gbt" || version != 1) fail("bad header");
  expect("base_score");
  if (!(in >> m.base_score)) fail("bad base_score");
  expect("learning_rate");
  if (!(in >> m.learning_rate)) fail("bad learning_rate");
  expect("trees");
  std::size_t n_trees = 0;
  if (!(in >> n_trees)) fail("bad tree count");
  m.trees.resize(n_trees);
  for (auto& t : m.trees) {
    expect("tree");
    std::size_t n_nodes = 0;
    if (!(in >> n_nodes) || n_nodes == 0) fail("bad node count");
    t.nodes.resize(n_nodes);
    for (auto& node : t.nodes) {
      std::string kind;
      in >> kind;
      if (kind == "leaf") {
        if (!(in >> node.weight)) fail("bad leaf weight");
      } else if (kind == "split") {
        std::string party;
        node.is_leaf = false;
        if (!(in >> party >> node.feature >> node.bin >> node.left >> node.right)) {
          fail("bad split");
        }
        if (party == "srv") {
          node.party = Party::kSrv;
        } else if (party == "fc") {
          node.party = Party::kFc;
        } else {
          fail("unknown party tag '" + party + "'");
        }
        if (node.left <= 0 || node.right <= 0 || static_cast<std::size_t>(node.left) >= n_nodes ||
            static_cast<std::size_t>(node.right) >= n_nodes) {
          fail("child index out of range");
        }
      } else {
        fail("unknown node kind '" + kind + "'");
      }
    }
  }
  for (int p = 0; p < 2; ++p) {
    expect("cuts");
    std::string party;
    std::size_t n_features = 0;
    if (!(in >> party >> n_features) || party != party_name(static_cast<Party>(p))) {
      fail("bad cuts header");
    }
    std::vector<std::vector<double>> cuts(n_features);
    for (auto& c : cuts) {
      std::size_t count = 0;
      if (!(in >> count)) fail("bad cut count");
      c.resize(count);
      for (double& v : c) {
        if (!(in >> v)) fail("bad cut value");
      }
    }
    m.cuts[p] = FeatureCuts(std::move(cuts));
  }
  return m;
}

std::string model_to_string(const Model& m) {
  std::ostringstream out;
  save_model(m, out);
  return out.str();
}

GradHess logistic_grad_hess(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw ConfigError("labels and scores differ in length");
  GradHess out;
  out.g.resize(labels.size());
  out.h.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = sigmoid(scores[i]);
    out.g[i] = p - labels[i];
    out.h[i] = p * (1.0 - p);
  }
  return out;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  double g = gl + gr, h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

RowSample goss_sample(std::span<const double> g, double top_rate, double other_rate,
                      std::uint64_t seed) {
  const std::size_t n = g.size();
  auto count_for = [n](double rate) {
    double c = std::ceil(rate * static_cast<double>(n) - 1e-9);
    return std::min(n, static_cast<std::size_t>(std::max(0.0, c)));
  };
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&g](std::uint32_t a, std::uint32_t b) {
    return std::abs(g[a]) > std::abs(g[b]);
  });
  std::size_t n_top = count_for(top_rate);
  std::size_t n_other = std::min(n - n_top, count_for(other_rate));

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n_other; ++i) {
    std::size_t span = n - n_top - i;
    std::size_t j = n_top + i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span));
    std::swap(order[n_top + i], order[j]);
  }
  double w_other = other_rate > 0 ? (1.0 - top_rate) / other_rate : 1.0;
  std::vector<std::pair<std::uint32_t, double>> picked;
  picked.reserve(n_top + n_other);
  for (std::size_t i = 0; i < n_top; ++i) picked.emplace_back(order[i], 1.0);
  for (std::size_t i = n_top; i < n_top + n_other; ++i) picked.emplace_back(order[i], w_other);
  std::sort(picked.begin(), picked.end());
  RowSample out;
  for (const auto& [idx, w] : picked) {
    out.indices.push_back(idx);
    out.weights.push_back(w);
  }
  return out;
}

RowSample sample_rows(std::span<const double> g, const BoostParams& params, int tree_index) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  if (params.direct_sampling_rate < 1.0) {
    std::size_t m = static_cast<std::size_t>(
        std::ceil(params.direct_sampling_rate * static_cast<double>(n) - 1e-9));
    m = std::clamp<std::size_t>(m, 1, n);
    std::mt19937_64 rng(derive_seed(params.seed, "direct-sampling", tree_index));
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
      std::swap(rows[i], rows[j]);
    }
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
  }
  if (!params.goss) {
    return RowSample{rows, std::vector<double>(rows.size(), 1.0)};
  }
  std::vector<double> sub(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) sub[i] = g[rows[i]];
  RowSample s = goss_sample(sub, params.goss->top_rate, params.goss->other_rate,
                            derive_seed(params.seed, "goss", tree_index));
  for (auto& idx : s.indices) idx = rows[idx];
  return s;
}

double base_log_odds(std::span<const int> labels) {
  require_binary(labels);
  double pos = 0;
  for (int y : labels) pos += y;
  double p = pos / static_cast<double>(labels.size());
  return std::log(p / (1.0 - p));
}

std::int64_t quantize(double v) { return std::llround(v * kQuantScale); }

double dequantize(__int128 v) { return static_cast<double>(v) / kQuantScale; }

Model train_centralized(const Eigen::MatrixXd& x, std::span<const int> labels,
                        const BoostParams& params) {
  params.validate();
  if (x.rows() == 0) throw ConfigError("empty training frame");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw ConfigError("feature rows and labels differ in length");
  }
  require_binary(labels);
  FeatureCuts cuts = FeatureCuts::fit(x, params.n_bins);
  BinMatrix bins = bin_matrix(cuts, x);
  std::vector<std::int64_t> gq(labels.size()), hq(labels.size());
  LocalProvider local(Party::kSrv, cuts, bins, gq, hq);
  Model m = boost_loop(labels, params, {&local}, gq, hq, nullptr);
  m.cuts[0] = std::move(cuts);
  return m;
}

std::string_view training_message_name(TrainingMessage m) {
  switch (m) {
    case TrainingMessage::kSetup: return "train_setup";
    case TrainingMessage::kEncryptedGradients: return "encrypted_gradients";
    case TrainingMessage::kHistogramRequest: return "histogram";
    case TrainingMessage::kSplitDecision: return "split_decision";
  }
  return "unknown";
}

PassiveParty::PassiveParty(Eigen::MatrixXd x, std::vector<std::string> sample_ids, int n_bins)
    : x_(std::move(x)), ids_(std::move(sample_ids)) {
  if (static_cast<std::size_t>(x_.rows()) != ids_.size()) {
    throw ConfigError("FC feature rows and sample ids differ in length");
  }
  cuts_ = FeatureCuts::fit(x_, n_bins);
  bins_ = bin_matrix(cuts_, x_);
}

Bytes PassiveParty::handle(TrainingMessage kind, std::span<const std::uint8_t> request) {
  ByteReader r(request);
  Bytes out;
  switch (kind) {
    case TrainingMessage::kSetup: out = on_setup(r); break;
    case TrainingMessage::kEncryptedGradients: out = on_gradients(r); break;
    case TrainingMessage::kHistogramRequest: out = on_histograms(r); break;
    case TrainingMessage::kSplitDecision: out = on_split(r); break;
    default: throw ProtocolError("unknown training message");
  }
  if (!r.done()) throw ProtocolError("trailing bytes in training message");
  return out;
}

Bytes PassiveParty::on_setup(ByteReader& r) {
  key_.emplace(get_mpz(r));
  std::uint32_t n = r.get_u32();
  if (n != ids_.size()) {
    throw ProtocolError("row misalignment: Srv has " + std::to_string(n) + " rows, FC has " +
                        std::to_string(ids_.size()));
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    if (r.get_string() != ids_[i]) {
      throw ProtocolError("row misalignment at row " + std::to_string(i));
    }
  }
  enc_g_.assign(n, key_->zero());
  enc_h_.assign(n, key_->zero());
  has_grad_.assign(n, 0);
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(cuts_.n_features()));
  for (int f = 0; f < cuts_.n_features(); ++f) w.put_u32(static_cast<std::uint32_t>(cuts_.n_bins(f)));
  return w.take();
}

Bytes PassiveParty::on_gradients(ByteReader& r) {
  if (!key_) throw ProtocolError("gradients before setup");
  r.get_u32();  // tree index
  std::uint32_t count = r.get_u32();
  std::fill(has_grad_.begin(), has_grad_.end(), 0);
  std::size_t width = key_->ciphertext_bytes();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t row = r.get_u32();
    if (row >= ids_.size()) throw ProtocolError("row index out of range");
    enc_g_[row] = key_->deserialize(r.get_raw(width));
    enc_h_[row] = key_->deserialize(r.get_raw(width));
    has_grad_[row] = 1;
  }
  return {};
}

Bytes PassiveParty::on_histograms(ByteReader& r) {
  if (!key_) throw ProtocolError("histogram request before setup");
  std::vector<std::uint32_t> rows = get_rows(r, ids_.size());
  for (std::uint32_t row : rows) {
    if (!has_grad_[row]) throw ProtocolError("histogram over a row without gradients");
  }
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(cuts_.n_features()));
  for (int f = 0; f < cuts_.n_features(); ++f) {
    int nb = cuts_.n_bins(f);
    std::vector<he::Ciphertext> g(nb, key_->zero()), h(nb, key_->zero());
    for (std::uint32_t row : rows) {
      std::uint8_t b = bins_[f][row];
      key_->add_into(g[b], enc_g_[row]);
      key_->add_into(h[b], enc_h_[row]);
    }
    w.put_u32(static_cast<std::uint32_t>(nb));
    for (int b = 0; b < nb; ++b) {
      w.put_raw(key_->serialize(g[b]));
      w.put_raw(key_->serialize(h[b]));
    }
  }
  return w.take();
}

Bytes PassiveParty::on_split(ByteReader& r) {
  std::uint32_t feature = r.get_u32();
  std::uint32_t bin = r.get_u32();
  if (feature >= static_cast<std::uint32_t>(cuts_.n_features()) ||
      bin + 1 >= static_cast<std::uint32_t>(cuts_.n_bins(static_cast<int>(feature)))) {
    throw ProtocolError("split decision names an unknown split");
  }
  std::vector<std::uint32_t> rows = get_rows(r, ids_.size());
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(rows.size()));
  Bytes packed((rows.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (bins_[feature][rows[i]] <= bin) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  w.put_raw(packed);
  return w.take();
}

Model train_vertical(const SrvView& srv, PassiveChannel& fc, const BoostParams& params,
                     const he::PaillierKeypair& keys) {
  params.validate();
  if (srv.x.rows() == 0) throw ConfigError("empty training frame");
  if (static_cast<std::size_t>(srv.x.rows()) != srv.labels.size() ||
      srv.labels.size() != srv.sample_ids.size()) {
    throw ConfigError("Srv view rows, labels and sample ids differ in length");
  }
  if (!keys.private_key) throw ConfigError("Srv needs the Paillier private key");
  require_binary(srv.labels);

  FeatureCuts cuts = FeatureCuts::fit(srv.x, params.n_bins);
  BinMatrix bins = bin_matrix(cuts, srv.x);
  std::vector<std::int64_t> gq(srv.labels.size()), hq(srv.labels.size());
  LocalProvider local(Party::kSrv, cuts, bins, gq, hq);
  RemoteProvider remote(fc, keys);
  remote.setup(srv.sample_ids);
  he::RandomStream rng(derive_seed(params.seed, "paillier-randomness"));

  auto send = [&](int tree, const RowSample& sample, const std::vector<std::int64_t>& g,
                  const std::vector<std::int64_t>& h) {
    remote.send_gradients(tree, sample, g, h, rng);
  };
  Model m = boost_loop(srv.labels, params, {&local, &remote}, gq, hq, send);
  m.cuts[0] = std::move(cuts);
  return m;
}

}  // namespace starlit::boost
