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

#ifndef STARLIT_METRICS_H_
#define STARLIT_METRICS_H_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace starlit::metrics {

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per distinct score, descending
  double auprc = 0;
};

// Step-wise average precision over the descending-score sweep. Equal scores
// enter together. Throws ConfigError when there is no positive label.
PrCurve pr_curve(std::span<const int> labels, std::span<const double> scores);
double auprc(std::span<const int> labels, std::span<const double> scores);

struct TrafficRow {
  std::string sender;
  std::string receiver;
  std::size_t bytes = 0;
  std::string phase;
};

struct MetricRow {
  std::string metric;
  std::string unit;
  double value = 0;
};

struct RunTimings {
  double total_seconds = 0;
  std::map<std::string, double> phase_seconds;
};

// Rows: auprc (if given), timings, peak memory, total bytes and bytes per phase.
std::vector<MetricRow> run_metrics(std::span<const TrafficRow> log, const RunTimings& timings,
                                   double peak_memory_mb, const double* test_auprc = nullptr);

// Peak resident set size of this process; 0 when unavailable.
double peak_resident_mb();

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
void write_message_log_csv(std::ostream& out, std::span<const TrafficRow> log);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace starlit::metrics

#endif  // STARLIT_METRICS_H_
