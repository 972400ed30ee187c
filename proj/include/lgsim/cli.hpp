// Copyright 2026 The lgsim Authors
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

/**
 * @file
 * Command-line front end: figure sweeps, optimization runs and noise
 * studies written as CSV or JSON.
 */
#pragma once

#include "lgsim/counting.hpp"
#include "lgsim/optimizer.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Command { SweepK4, SweepK3, SweepWitness, Optimize, Noise };
enum class OutputFormat { Csv, Json };

std::string command_name(Command c);
std::string tool_version();

/// `steps` evenly spaced points from start to stop inclusive (steps = 1
/// yields just `start`). Radians.
struct GridAxis {
    double start = 0.0;
    double stop = 0.0;
    int steps = 1;

    [[nodiscard]] std::vector<double> values() const;
};

/// Parses "name=start:stop:steps". start and stop accept plain numbers and
/// multiples of pi such as "pi/4", "3pi/4" or "0.5*pi".
std::pair<std::string, GridAxis> parse_grid(const std::string &text, bool degrees);
double parse_angle(const std::string &text);

struct RunConfig {
    Command command = Command::SweepK4;
    std::map<std::string, GridAxis> grid; ///< "theta" and "phi"
    std::uint64_t seed = 1;
    std::string output_path;              ///< "-" writes to stdout
    OutputFormat format = OutputFormat::Csv;
    bool deterministic = false;
    bool degrees = false;

    // noise
    ProtocolKind protocol = ProtocolKind::K4;
    double counts = 28000.0;
    int repeats = 500;
    double plate_sigma = 0.1;
    int plates = 7;
    double doubling = 2.0;

    // optimize
    int levels = 3;
    int times = 3;
    bool constrained = true;
    Budget budget;

    /// Fills in default axes and checks invariants. Throws ConfigError.
    void finalize();
};

/// Throws ConfigError on bad input. `help` is set (and the config left
/// unspecified) when --help was requested.
RunConfig parse_command_line(int argc, const char *const *argv, std::ostream &out, bool &help);

/// Tabular result of a run before serialization.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    /// Ordered key/value metadata echoed in the header.
    std::vector<std::pair<std::string, std::string>> metadata;
};

Table compute(const RunConfig &config);
std::string render(const Table &table, OutputFormat format);

/// Runs one configured command and writes its output. Returns an exit code.
int run(const RunConfig &config, std::ostream &log);

/// Full entry point: parse, run, map failures onto exit codes.
int main_entry(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace lgsim::cli
