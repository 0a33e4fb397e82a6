#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

namespace fftconv {

// Small string table with CSV and aligned-Markdown rendering for the CLI
// reports.
class Table {
 public:
  explicit Table(std::vector<std::string> headers)
      : headers_(std::move(headers)) {}

  void add_row(std::vector<std::string> cells) {
    cells.resize(headers_.size());
    rows_.push_back(std::move(cells));
  }

  std::size_t row_count() const { return rows_.size(); }

  std::string csv() const {
    std::ostringstream out;
    join(out, headers_);
    for (const auto& r : rows_) join(out, r);
    return out.str();
  }

  std::string markdown() const {
    std::vector<std::size_t> width(headers_.size());
    for (std::size_t c = 0; c < headers_.size(); ++c)
      width[c] = headers_[c].size();
    for (const auto& r : rows_)
      for (std::size_t c = 0; c < r.size(); ++c)
        width[c] = std::max(width[c], r[c].size());

    std::ostringstream out;
    line(out, headers_, width);
    out << '|';
    for (std::size_t c = 0; c < headers_.size(); ++c)
      out << std::string(width[c] + 2, '-') << '|';
    out << '\n';
    for (const auto& r : rows_) line(out, r, width);
    return out.str();
  }

 private:
  static void join(std::ostringstream& out,
                   const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << ',';
      out << cells[c];
    }
    out << '\n';
  }

  static void line(std::ostringstream& out,
                   const std::vector<std::string>& cells,
                   const std::vector<std::size_t>& width) {
    out << '|';
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string& v = c < cells.size() ? cells[c] : std::string();
      out << ' ' << v << std::string(width[c] - v.size() + 1, ' ') << '|';
    }
    out << '\n';
  }

  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fftconv
