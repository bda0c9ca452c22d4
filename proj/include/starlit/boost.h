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

#ifndef STARLIT_BOOST_H_
#define STARLIT_BOOST_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starlit/common.h"
#include "starlit/paillier.h"

namespace starlit::boost {

struct GossParams {
  double top_rate = 0.1;
  double other_rate = 0.1;
};

struct BoostParams {
  int n_trees = 10;
  int max_depth = 3;
  double lambda_l2 = 0.1;
  double gamma = 0.0;
  double learning_rate = 0.3;
  double direct_sampling_rate = 1.0;
  std::optional<GossParams> goss;
  int n_bins = 32;
  double min_child_weight = 1.0;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Party : std::uint8_t { kSrv = 0, kFc = 1 };

std::string_view party_name(Party p);

// Equal-frequency quantile cut points per feature. Bin b holds values in
// (cuts[b-1], cuts[b]]; a split at bin b sends x <= cuts[b] left.
class FeatureCuts {
 public:
  FeatureCuts() = default;
  explicit FeatureCuts(std::vector<std::vector<double>> cuts) : cuts_(std::move(cuts)) {}

  static FeatureCuts fit(const Eigen::MatrixXd& x, int n_bins);

  int n_features() const { return static_cast<int>(cuts_.size()); }
  int n_bins(int feature) const { return static_cast<int>(cuts_[feature].size()) + 1; }
  int bin(int feature, double value) const;
  double threshold(int feature, int bin) const { return cuts_[feature][bin]; }
  const std::vector<std::vector<double>>& cuts() const { return cuts_; }

  bool operator==(const FeatureCuts& other) const { return cuts_ == other.cuts_; }

 private:
  std::vector<std::vector<double>> cuts_;
};

// Column-major bin indices: bins[feature][row].
using BinMatrix = std::vector<std::vector<std::uint8_t>>;
BinMatrix bin_matrix(const FeatureCuts& cuts, const Eigen::MatrixXd& x);

struct TreeNode {
  bool is_leaf = true;
  double weight = 0.0;  // leaf only
  Party party = Party::kSrv;
  int feature = -1;
  int bin = -1;
  int left = -1;
  int right = -1;

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int depth() const;
  bool operator==(const Tree&) const = default;
};

struct Model {
  double base_score = 0.0;
  double learning_rate = 0.3;
  std::vector<Tree> trees;
  // cuts[kFc] is empty on the Srv side of a federated run; the FC keeps it.
  std::array<FeatureCuts, 2> cuts;

  bool has_fc_splits() const;
};

// Leaf value reached by the row; fc_row may be empty if no split on the path
// is FC-owned.
double tree_value(const Model& m, const Tree& t, std::span<const double> srv_row,
                  std::span<const double> fc_row);
double predict_margin(const Model& m, std::span<const double> srv_row,
                      std::span<const double> fc_row = {});
// Sigmoid of the margin. Throws ConfigError if the model has FC-owned splits
// and fc_row is empty or the FC cuts are missing.
double predict(const Model& m, std::span<const double> srv_row,
               std::span<const double> fc_row = {});
Eigen::VectorXd predict(const Model& m, const Eigen::MatrixXd& srv,
                        const Eigen::MatrixXd& fc);

// Split inference: FC evaluates its own nodes and returns one left/right bit
// per (FC node, row); Srv walks the trees with those bits.
struct FcNodeRef {
  int tree = 0;
  int node = 0;
  int feature = 0;
  int bin = 0;
};
std::vector<FcNodeRef> fc_nodes(const Model& m);
std::vector<std::vector<std::uint8_t>> evaluate_fc_nodes(const FeatureCuts& fc_cuts,
                                                         const std::vector<FcNodeRef>& refs,
                                                         const Eigen::MatrixXd& fc);
Eigen::VectorXd predict_with_fc_bits(const Model& m, const Eigen::MatrixXd& srv,
                                     const std::vector<FcNodeRef>& refs,
                                     const std::vector<std::vector<std::uint8_t>>& bits);

void save_model(const Model& m, std::ostream& out);
Model load_model(std::istream& in);
std::string model_to_string(const Model& m);

struct GradHess {
  std::vector<double> g;
  std::vector<double> h;
};
GradHess logistic_grad_hess(std::span<const int> labels, std::span<const double> scores);

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

struct RowSample {
  std::vector<std::uint32_t> indices;  // ascending
  std::vector<double> weights;         // aligned with indices
};
RowSample goss_sample(std::span<const double> g, double top_rate, double other_rate,
                      std::uint64_t seed);
// Per-tree sample: uniform direct subsample, then GOSS on it if configured.
RowSample sample_rows(std::span<const double> g, const BoostParams& params, int tree_index);

double base_log_odds(std::span<const int> labels);

// Fixed-point gradient quantization shared by both trainers so that
// histogram sums, and hence split decisions, agree exactly.
std::int64_t quantize(double v);
double dequantize(__int128 v);

Model train_centralized(const Eigen::MatrixXd& x, std::span<const int> labels,
                        const BoostParams& params);

enum class TrainingMessage : std::uint8_t {
  kSetup = 1,               // public key + aligned sample ids
  kEncryptedGradients = 2,  // per tree: sampled rows with Enc(g), Enc(h)
  kHistogramRequest = 3,    // node rows -> encrypted per-bin sums
  kSplitDecision = 4,       // (feature, bin, node rows) -> left bitmap
};

std::string_view training_message_name(TrainingMessage m);

// Srv-side handle on the passive party. The only way Srv reaches FC data.
class PassiveChannel {
 public:
  virtual ~PassiveChannel() = default;
  virtual Bytes exchange(TrainingMessage kind, Bytes request) = 0;
};

// FC side of vertical training: holds the raw feature columns and its cuts.
class PassiveParty {
 public:
  PassiveParty(Eigen::MatrixXd x, std::vector<std::string> sample_ids, int n_bins);

  Bytes handle(TrainingMessage kind, std::span<const std::uint8_t> request);
  const FeatureCuts& cuts() const { return cuts_; }
  const Eigen::MatrixXd& features() const { return x_; }

 private:
  Bytes on_setup(ByteReader& r);
  Bytes on_gradients(ByteReader& r);
  Bytes on_histograms(ByteReader& r);
  Bytes on_split(ByteReader& r);

  Eigen::MatrixXd x_;
  std::vector<std::string> ids_;
  FeatureCuts cuts_;
  BinMatrix bins_;
  std::optional<he::PaillierPublicKey> key_;
  std::vector<he::Ciphertext> enc_g_, enc_h_;  // indexed by row
  std::vector<std::uint8_t> has_grad_;
};

class DirectChannel : public PassiveChannel {
 public:
  explicit DirectChannel(PassiveParty& party) : party_(party) {}
  Bytes exchange(TrainingMessage kind, Bytes request) override {
    return party_.handle(kind, request);
  }

 private:
  PassiveParty& party_;
};

struct SrvView {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  std::vector<std::string> sample_ids;
};

// Active-party trainer. Gradients leave Srv only under Paillier encryption;
// FC returns encrypted per-bin sums and partition bitmaps.
Model train_vertical(const SrvView& srv, PassiveChannel& fc, const BoostParams& params,
                     const he::PaillierKeypair& keys);

}  // namespace starlit::boost

#endif  // STARLIT_BOOST_H_
