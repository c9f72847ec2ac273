#include "noisycp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace noisycp {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": bad float field '" + field + "'");
  }
  return value;
}

void softmax_in_place(std::span<double> row) {
  double max = row[0];
  for (double x : row) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("non-finite raw score");
    }
    if (x > max) max = x;
  }
  double sum = 0.0;
  for (auto& x : row) {
    x = std::exp(x - max);
    sum += x;
  }
  for (auto& x : row) x /= sum;
}

Label parse_label_field(const std::string& field, int k, std::size_t line_no) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": bad label field '" + field + "'");
  }
  if (value < 0 || value >= k) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": label " +
                                std::to_string(value) + " outside [0, " +
                                std::to_string(k) + ")");
  }
  return value;
}

}  // namespace

void validate_prob_row(std::span<double> probs) {
  if (probs.size() < 2) {
    throw std::invalid_argument("probability row needs at least 2 classes");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(std::isfinite(p) && p >= 0.0 && p <= 1.0 + kRowSumTolerance)) {
      throw std::invalid_argument("probability entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw std::invalid_argument("probability row sums to " +
                                std::to_string(sum) + ", not 1");
  }
  // Rows already at 1 to double precision pass through untouched, which makes
  // ingestion idempotent: written files re-read to bit-identical values.
  if (std::abs(sum - 1.0) <= kRowSumExact) return;
  for (auto& p : probs) p /= sum;
}

ProbMatrix::ProbMatrix(int k) : k_(k) {
  if (k < 2) throw std::invalid_argument("need at least 2 classes");
}

ProbMatrix::ProbMatrix(std::size_t n, int k) : ProbMatrix(k) {
  data_.assign(n * static_cast<std::size_t>(k), 0.0);
}

void ProbMatrix::append_validated(std::span<const double> probs) {
  if (probs.size() != static_cast<std::size_t>(k_)) {
    throw std::invalid_argument("row width does not match k");
  }
  const std::size_t offset = data_.size();
  data_.insert(data_.end(), probs.begin(), probs.end());
  validate_prob_row({data_.data() + offset, static_cast<std::size_t>(k_)});
}

void ProbMatrix::append_unchecked(std::span<const double> probs) {
  data_.insert(data_.end(), probs.begin(), probs.end());
}

void validate(const LabeledPool& pool) {
  const int k = pool.k();
  if (pool.observed.size() != pool.probs.rows()) {
    throw std::invalid_argument("label count does not match row count");
  }
  for (Label y : pool.observed) {
    if (y < 0 || y >= k) throw std::invalid_argument("observed label outside [0, k)");
  }
  if (pool.clean) {
    if (pool.clean->size() != pool.observed.size()) {
      throw std::invalid_argument("clean label count does not match row count");
    }
    for (Label y : *pool.clean) {
      if (y < 0 || y >= k) throw std::invalid_argument("clean label outside [0, k)");
    }
  }
  if (pool.noise) {
    validate(*pool.noise);
    if (pool.noise->k != k) {
      throw std::invalid_argument("noise metadata k does not match pool k");
    }
  }
  if (pool.true_probs && pool.true_probs->rows() != pool.probs.rows()) {
    throw std::invalid_argument("true probability rows do not match pool size");
  }
}

bool pool_is_precorrupted(const LabeledPool& pool) {
  if (pool.noise) return true;
  if (!pool.clean) return false;
  for (std::size_t i = 0; i < pool.observed.size(); ++i) {
    if (pool.observed[i] != (*pool.clean)[i]) return true;
  }
  return false;
}

LabeledPool read_dataset_csv(const std::string& path, bool softmax_rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("dataset file is empty: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  int k = 0;
  while (static_cast<std::size_t>(k) < header.size() &&
         (header[static_cast<std::size_t>(k)] == "p" + std::to_string(k) ||
          header[static_cast<std::size_t>(k)] == "p_" + std::to_string(k))) {
    ++k;
  }
  const std::size_t rest = header.size() - static_cast<std::size_t>(k);
  const bool has_clean = rest == 2;
  if (k < 2 || rest < 1 || rest > 2 ||
      header[static_cast<std::size_t>(k)] != "label" ||
      (has_clean && header.back() != "clean_label")) {
    throw std::invalid_argument(
        "bad dataset header, expected p0,...,p{k-1},label[,clean_label]");
  }

  LabeledPool pool{ProbMatrix(k), {}, {}, {}, {}};
  if (has_clean) pool.clean.emplace();
  std::vector<double> row(static_cast<std::size_t>(k));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    for (int j = 0; j < k; ++j) {
      row[static_cast<std::size_t>(j)] =
          parse_double_field(fields[static_cast<std::size_t>(j)], line_no);
    }
    try {
      if (softmax_rows) {
        softmax_in_place(row);
        pool.probs.append_unchecked(row);
      } else {
        pool.probs.append_validated(row);
      }
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                  err.what());
    }
    pool.observed.push_back(
        parse_label_field(fields[static_cast<std::size_t>(k)], k, line_no));
    if (has_clean) {
      pool.clean->push_back(parse_label_field(fields.back(), k, line_no));
    }
  }
  if (pool.observed.empty()) {
    throw std::invalid_argument("dataset has no data rows: " + path);
  }
  return pool;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("float formatting failed");
  return std::string(buf, ptr);
}

std::string dataset_to_csv(const LabeledPool& pool) {
  validate(pool);
  std::ostringstream out;
  const int k = pool.k();
  for (int j = 0; j < k; ++j) out << 'p' << j << ',';
  out << "label";
  if (pool.clean) out << ",clean_label";
  out << '\n';
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto row = pool.probs.row(i);
    for (double p : row) out << format_double(p) << ',';
    out << pool.observed[i];
    if (pool.clean) out << ',' << (*pool.clean)[i];
    out << '\n';
  }
  return out.str();
}

void write_dataset_csv(const std::string& path, const LabeledPool& pool) {
  write_text_atomic(path, dataset_to_csv(pool));
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move " + tmp + " into place");
  }
}

}  // namespace noisycp
