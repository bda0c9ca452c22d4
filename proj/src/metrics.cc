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

#include "starlit/metrics.h"

#include <sys/resource.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "starlit/common.h"

namespace starlit::metrics {

PrCurve pr_curve(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw ConfigError("labels and scores differ in length");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0) throw ConfigError("average precision needs at least one positive label");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  PrCurve curve;
  std::size_t tp = 0, seen = 0;
  double prev_recall = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    seen = j;
    double recall = static_cast<double>(tp) / static_cast<double>(positives);
    double precision = static_cast<double>(tp) / static_cast<double>(seen);
    curve.auprc += (recall - prev_recall) * precision;
    curve.points.push_back({recall, precision});
    prev_recall = recall;
    i = j;
  }
  return curve;
}

double auprc(std::span<const int> labels, std::span<const double> scores) {
  return pr_curve(labels, scores).auprc;
}

std::vector<MetricRow> run_metrics(std::span<const TrafficRow> log, const RunTimings& timings,
                                   double peak_memory_mb, const double* test_auprc) {
  std::vector<MetricRow> rows;
  if (test_auprc != nullptr) rows.push_back({"auprc", "-", *test_auprc});
  rows.push_back({"total_training_time", "s", timings.total_seconds});
  for (const auto& [phase, s] : timings.phase_seconds) {
    rows.push_back({"time." + phase, "s", s});
  }
  rows.push_back({"peak_training_memory", "MB", peak_memory_mb});
  std::size_t total = 0, messages = 0;
  std::map<std::string, std::size_t> by_phase;
  for (const auto& m : log) {
    total += m.bytes;
    by_phase[m.phase] += m.bytes;
    ++messages;
  }
  rows.push_back({"network_volume", "bytes", static_cast<double>(total)});
  rows.push_back({"network_messages", "count", static_cast<double>(messages)});
  for (const auto& [phase, b] : by_phase) {
    rows.push_back({"network_volume." + phase, "bytes", static_cast<double>(b)});
  }
  return rows;
}

double peak_resident_mb() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is in KiB on Linux
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "metric,unit,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g", r.value);
    out << r.metric << ',' << r.unit << ',' << buf << '\n';
  }
}

void write_message_log_csv(std::ostream& out, std::span<const TrafficRow> log) {
  out << "sender,receiver,bytes,phase\n";
  for (const auto& m : log) {
    out << m.sender << ',' << m.receiver << ',' << m.bytes << ',' << m.phase << '\n';
  }
}

}  // namespace starlit::metrics
