// src/score_io.cc

// Copyright 2026  Tandem-Reinforce Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tandem/score_io.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tandem {

namespace {

std::runtime_error line_error(const std::filesystem::path &path,
                              std::size_t line_no, const std::string &what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line_no << ": " << what;
  return std::runtime_error(msg.str());
}

// Splits on runs of spaces/tabs; rejects empty tokens implicitly.
std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_double(const std::string &token, const std::filesystem::path &path,
                    std::size_t line_no, const char *field) {
  const char *begin = token.c_str();
  char *end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw line_error(path, line_no,
                     std::string("field '") + field + "' is not a number: '" +
                         token + "'");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  return out;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

void write_scores(const std::filesystem::path &path,
                  std::span<const ScoredTrial> records) {
  std::ofstream out = open_output(path);
  for (const ScoredTrial &r : records) {
    out << r.id << ' ' << to_string(r.cls) << ' ' << format_score(r.asv_score)
        << ' ' << format_score(r.cm_score) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ScoredTrial> read_scores(const std::filesystem::path &path) {
  std::ifstream in = open_input(path);
  std::vector<ScoredTrial> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) {
      throw line_error(path, line_no, "empty line");
    }
    if (fields.size() != 4) {
      throw line_error(path, line_no,
                       "expected 4 fields <trial_id> <class> <asv_score> "
                       "<cm_score>, got " +
                           std::to_string(fields.size()));
    }
    ScoredTrial record;
    record.id = fields[0];
    try {
      record.cls = trial_class_from_string(fields[1]);
    } catch (const std::exception &) {
      throw line_error(path, line_no,
                       "field 'class' must be target|nontarget|spoof, got '" +
                           fields[1] + "'");
    }
    record.asv_score = parse_double(fields[2], path, line_no, "asv_score");
    record.cm_score = parse_double(fields[3], path, line_no, "cm_score");
    records.push_back(std::move(record));
  }
  return records;
}

void write_protocol(const std::filesystem::path &path,
                    std::span<const ProtocolEntry> entries) {
  std::ofstream out = open_output(path);
  for (const ProtocolEntry &e : entries) {
    out << e.id << ' ' << e.speaker << ' ' << to_string(e.cls) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ProtocolEntry> parse_protocol(const std::filesystem::path &path) {
  std::ifstream in = open_input(path);
  std::vector<ProtocolEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) {
      throw line_error(path, line_no, "empty line");
    }
    if (fields.size() != 3) {
      throw line_error(
          path, line_no,
          "expected 3 fields <trial_id> <speaker_id> <class>, got " +
              std::to_string(fields.size()));
    }
    ProtocolEntry entry;
    entry.id = fields[0];
    entry.speaker = fields[1];
    try {
      entry.cls = trial_class_from_string(fields[2]);
    } catch (const std::exception &) {
      throw line_error(path, line_no,
                       "field 'class' must be target|nontarget|spoof, got '" +
                           fields[2] + "'");
    }
    if (!seen.insert(entry.id).second) {
      throw line_error(path, line_no, "duplicate trial id '" + entry.id + "'");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace tandem
