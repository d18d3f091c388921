// SPDX-License-Identifier: Apache-2.0

/**
 * @file io.hpp
 * Dataset CSV ingestion/emission and the versioned plain-text model format.
 *
 * Dataset CSV: header `time,<channel>...[,s:<track>...]`, one row per
 * snapshot, `#` starts a comment line.
 *
 * Model file (version 1): `key value` header lines, then one
 * `slot <index>` section per slot holding labelled matrices written
 * row-major at 17 significant digits (`Qx`, `Qy`, `A_1`..`A_r`, `b`,
 * `ybar`), then an optional `ledger` section, then `end`.
 */

#ifndef PDC_IO_HPP
#define PDC_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pdc/core.hpp"

namespace pdc {

// ============================================================================
// Text helpers
// ============================================================================

/// %.17g: enough digits to round-trip any double exactly.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline double parse_double_or_throw(std::string_view s, std::size_t line) {
  double v = 0.0;
  if (!parse_double(s, v)) throw ParseError("not a finite number: '" + std::string(s) + "'", line);
  return v;
}

inline int parse_int_or_throw(std::string_view s, std::size_t line) {
  int v = 0;
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("not an integer: '" + std::string(s) + "'", line);
  return v;
}

}  // namespace detail

/// Writes to `path` via a temporary sibling and rename, so readers never see partial files.
template <class Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ============================================================================
// Dataset CSV
// ============================================================================

struct CsvTable {
  std::vector<std::string> channels;
  std::vector<std::string> tracks;
};

inline TimeSeries read_csv(std::istream& in, CsvTable* header_out = nullptr) {
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::size_t n_channels = 0;
  bool have_header = false;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> tracks;
  std::vector<std::string> track_names;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');
    if (!have_header) {
      if (cells.empty() || cells[0] != "time") throw ParseError("header must start with 'time'", line_no);
      bool in_tracks = false;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto c = cells[i];
        if (c.empty()) throw ParseError("empty column name", line_no);
        if (c.substr(0, 2) == "s:") {
          in_tracks = true;
          if (c.size() == 2) throw ParseError("empty exogenous track name", line_no);
          track_names.emplace_back(c.substr(2));
        } else {
          if (in_tracks) throw ParseError("channel column after exogenous columns", line_no);
          names.emplace_back(c);
        }
      }
      n_channels = names.size();
      if (n_channels == 0) throw ParseError("no channel columns", line_no);
      tracks.resize(track_names.size());
      rows.resize(n_channels);
      have_header = true;
      continue;
    }
    if (cells.size() != 1 + n_channels + track_names.size())
      throw ParseError("expected " + std::to_string(1 + n_channels + track_names.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    const double t = detail::parse_double_or_throw(cells[0], line_no);
    if (!times.empty() && !(t > times.back())) throw ParseError("time column is not strictly increasing", line_no);
    times.push_back(t);
    for (std::size_t i = 0; i < n_channels; ++i) rows[i].push_back(detail::parse_double_or_throw(cells[1 + i], line_no));
    for (std::size_t i = 0; i < track_names.size(); ++i)
      tracks[i].push_back(detail::parse_double_or_throw(cells[1 + n_channels + i], line_no));
  }
  if (!have_header) throw ParseError("missing header row", line_no);
  if (times.size() < 2) throw ParseError("need at least two data rows", line_no);

  Matrix values(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < n_channels; ++i)
    for (std::size_t j = 0; j < times.size(); ++j) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  TimeSeries::Tracks ex;
  for (std::size_t i = 0; i < track_names.size(); ++i) {
    if (ex.count(track_names[i])) throw ParseError("duplicate exogenous track '" + track_names[i] + "'", 0);
    ex[track_names[i]] = std::move(tracks[i]);
  }
  if (header_out) {
    header_out->channels = names;
    header_out->tracks = track_names;
  }
  return TimeSeries(std::move(values), std::move(times), std::move(ex));
}

/// Reads a dataset file; malformed content raises ParseError with the line number.
inline TimeSeries ingest_csv(const std::filesystem::path& path, CsvTable* header_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return read_csv(in, header_out);
}

inline void write_csv(std::ostream& out, const TimeSeries& series, const std::vector<std::string>& channel_names = {}) {
  out << "time";
  for (int i = 0; i < series.n(); ++i)
    out << ',' << (static_cast<int>(channel_names.size()) > i ? channel_names[static_cast<std::size_t>(i)] : "z" + std::to_string(i + 1));
  for (const auto& [name, track] : series.exogenous()) out << ",s:" << name;
  out << '\n';
  for (int j = 0; j < series.N(); ++j) {
    out << format_number(series.times()[static_cast<std::size_t>(j)]);
    for (int i = 0; i < series.n(); ++i) out << ',' << format_number(series.values()(i, j));
    for (const auto& [name, track] : series.exogenous()) out << ',' << format_number(track[static_cast<std::size_t>(j)]);
    out << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const TimeSeries& series,
                      const std::vector<std::string>& channel_names = {}) {
  write_atomically(path, [&](std::ostream& out) { write_csv(out, series, channel_names); });
}

// ============================================================================
// Model file
// ============================================================================

inline constexpr int kModelFormatVersion = 1;

using ModelMetadata = std::map<std::string, std::string>;

namespace detail {

inline void write_matrix(std::ostream& out, std::string_view label, const Matrix& M) {
  out << label << ' ' << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? " " : "") << format_number(M(i, j));
    out << '\n';
  }
}

inline void write_vector(std::ostream& out, std::string_view label, const Vector& v) {
  out << label << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_number(v(i));
  out << '\n';
}

inline std::string_view ledger_basis_name(CoefficientLedger::Basis b) {
  switch (b) {
    case CoefficientLedger::Basis::Constant: return "constant";
    case CoefficientLedger::Basis::Cos: return "cos";
    case CoefficientLedger::Basis::Sin: return "sin";
    case CoefficientLedger::Basis::Monomial: return "monomial";
  }
  return "constant";
}

/// Line-oriented reader that skips blanks and comments and tracks line numbers.
class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string_view> next(std::string_view expect_what) {
    while (std::getline(in_, buf_)) {
      ++line_;
      const auto t = trim(buf_);
      if (t.empty() || t.front() == '#') continue;
      return split_ws(t);
    }
    throw ParseError("unexpected end of file, expected " + std::string(expect_what), line_);
  }

  std::size_t line() const { return line_; }

  Matrix matrix(std::string_view label, Eigen::Index rows, Eigen::Index cols) {
    const auto head = next(label);
    if (head.size() != 3 || head[0] != label) throw ParseError("expected '" + std::string(label) + " <rows> <cols>'", line_);
    if (parse_int_or_throw(head[1], line_) != rows || parse_int_or_throw(head[2], line_) != cols)
      throw ParseError("'" + std::string(label) + "' has unexpected dimensions", line_);
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto cells = next("matrix row");
      if (static_cast<Eigen::Index>(cells.size()) != cols) throw ParseError("matrix row has wrong length", line_);
      for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = parse_double_or_throw(cells[static_cast<std::size_t>(j)], line_);
    }
    return M;
  }

  Vector vector(std::string_view label, Eigen::Index size) {
    const auto head = next(label);
    if (head.size() != 2 || head[0] != label) throw ParseError("expected '" + std::string(label) + " <size>'", line_);
    if (parse_int_or_throw(head[1], line_) != size) throw ParseError("'" + std::string(label) + "' has unexpected size", line_);
    Vector v(size);
    if (size == 0) return v;
    const auto cells = next("vector values");
    if (static_cast<Eigen::Index>(cells.size()) != size) throw ParseError("vector has wrong length", line_);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = parse_double_or_throw(cells[static_cast<std::size_t>(i)], line_);
    return v;
  }

private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_ = 0;
};

}  // namespace detail

inline void write_model(std::ostream& out, const ReducedModel& model, std::uint64_t seed = 0,
                        const ModelMetadata& meta = {}) {
  const int m = model.m(), n = model.n();
  out << "# principal dynamical components model\n";
  out << "version " << kModelFormatVersion << '\n';
  out << "n " << n << '\n' << "m " << m << '\n' << "r " << model.r() << '\n';
  switch (model.slots().mode()) {
    case SlotIndexer::Mode::Autonomous: out << "slots auto\n"; break;
    case SlotIndexer::Mode::Periodic: out << "slots periodic " << model.slots().period() << '\n'; break;
    case SlotIndexer::Mode::PerStep: out << "slots perstep " << model.slot_count() << '\n'; break;
  }
  out << "seed " << seed << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
  for (int s = 0; s < model.slot_count(); ++s) {
    const auto& p = model.slot(s);
    out << "slot " << s << '\n';
    detail::write_matrix(out, "Qx", model.Qx(s));
    detail::write_matrix(out, "Qy", model.Qy(s));
    for (int i = 0; i < model.r(); ++i) detail::write_matrix(out, "A_" + std::to_string(i + 1), p.A[static_cast<std::size_t>(i)]);
    detail::write_vector(out, "b", p.b);
    detail::write_vector(out, "ybar", p.ybar);
  }
  if (model.ledger()) {
    const auto& L = *model.ledger();
    out << "ledger " << (L.valid ? "valid" : "invalid") << ' ' << L.terms.size() << '\n';
    for (const auto& t : L.terms) {
      out << "term " << detail::ledger_basis_name(t.basis) << ' ' << t.k << ' ' << format_number(t.period) << '\n';
      for (int i = 0; i < model.r(); ++i) detail::write_matrix(out, "A_" + std::to_string(i + 1), t.A[static_cast<std::size_t>(i)]);
      detail::write_vector(out, "b", t.b);
      detail::write_vector(out, "ybar", t.ybar);
    }
  }
  out << "end\n";
}

inline void write_model(const std::filesystem::path& path, const ReducedModel& model, std::uint64_t seed = 0,
                        const ModelMetadata& meta = {}) {
  write_atomically(path, [&](std::ostream& out) { write_model(out, model, seed, meta); });
}

struct LoadedModel {
  ReducedModel model;
  std::uint64_t seed = 0;
  ModelMetadata meta;
};

/// Parses a model file and re-verifies orthogonality of every slot basis.
inline LoadedModel read_model(std::istream& in) {
  detail::LineReader rd(in);
  int version = -1, n = 0, m = 0, r = 0, slot_count = 1;
  std::uint64_t seed = 0;
  SlotIndexer slots = SlotIndexer::autonomous();
  ModelMetadata meta;
  std::vector<std::string_view> tok;
  bool have_slots = false;
  while (true) {
    tok = rd.next("header or slot section");
    const auto key = tok[0];
    if (key == "slot" || key == "end" || key == "ledger") break;
    if (key == "version" && tok.size() == 2) {
      version = detail::parse_int_or_throw(tok[1], rd.line());
    } else if (key == "n" && tok.size() == 2) {
      n = detail::parse_int_or_throw(tok[1], rd.line());
    } else if (key == "m" && tok.size() == 2) {
      m = detail::parse_int_or_throw(tok[1], rd.line());
    } else if (key == "r" && tok.size() == 2) {
      r = detail::parse_int_or_throw(tok[1], rd.line());
    } else if (key == "seed" && tok.size() == 2) {
      const auto s = tok[1];
      if (std::from_chars(s.data(), s.data() + s.size(), seed).ec != std::errc()) throw ParseError("bad seed", rd.line());
    } else if (key == "slots" && tok.size() >= 2) {
      have_slots = true;
      if (tok[1] == "auto" && tok.size() == 2) {
        slots = SlotIndexer::autonomous();
        slot_count = 1;
      } else if (tok[1] == "periodic" && tok.size() == 3) {
        const int T = detail::parse_int_or_throw(tok[2], rd.line());
        if (T < 1) throw ParseError("period must be positive", rd.line());
        slots = SlotIndexer::periodic(T);
        slot_count = T;
      } else if (tok[1] == "perstep" && tok.size() == 3) {
        slots = SlotIndexer::per_step();
        slot_count = detail::parse_int_or_throw(tok[2], rd.line());
        if (slot_count < 1) throw ParseError("slot count must be positive", rd.line());
      } else {
        throw ParseError("bad slots line", rd.line());
      }
    } else if (key == "meta" && tok.size() >= 2) {
      std::string value;
      for (std::size_t i = 2; i < tok.size(); ++i) value += (i > 2 ? " " : "") + std::string(tok[i]);
      meta[std::string(tok[1])] = value;
    } else {
      throw ParseError("unknown header line '" + std::string(key) + "'", rd.line());
    }
  }
  if (version != kModelFormatVersion) throw ParseError("unsupported model version " + std::to_string(version), rd.line());
  if (!have_slots) throw ParseError("missing slots line", rd.line());
  if (n < 2 || m < 1 || m >= n || r < 1) throw ParseError("invalid dimensions n/m/r", rd.line());

  ReducedModel model(n, m, r, slots, slot_count);
  for (int s = 0; s < slot_count; ++s) {
    if (s > 0) tok = rd.next("slot section");
    if (tok.size() != 2 || tok[0] != "slot" || detail::parse_int_or_throw(tok[1], rd.line()) != s)
      throw ParseError("expected 'slot " + std::to_string(s) + "'", rd.line());
    auto& p = model.slot(s);
    p.Q.leftCols(m) = rd.matrix("Qx", n, m);
    p.Q.rightCols(n - m) = rd.matrix("Qy", n, n - m);
    for (int i = 0; i < r; ++i) p.A[static_cast<std::size_t>(i)] = rd.matrix("A_" + std::to_string(i + 1), m, m);
    p.b = rd.vector("b", m);
    p.ybar = rd.vector("ybar", n - m);
    const double err = orthogonality_error(p.Q);
    if (err > 1e-9) throw ParseError("slot " + std::to_string(s) + " basis is not orthogonal (|Q'Q - I| = " + std::to_string(err) + ")", rd.line());
  }
  tok = rd.next("'ledger' or 'end'");
  if (tok[0] == "ledger") {
    if (tok.size() != 3) throw ParseError("expected 'ledger <valid|invalid> <terms>'", rd.line());
    CoefficientLedger L;
    L.valid = tok[1] == "valid";
    const int terms = detail::parse_int_or_throw(tok[2], rd.line());
    for (int t = 0; t < terms; ++t) {
      const auto th = rd.next("ledger term");
      if (th.size() != 4 || th[0] != "term") throw ParseError("expected 'term <basis> <k> <period>'", rd.line());
      CoefficientLedger::Term term;
      if (th[1] == "constant") term.basis = CoefficientLedger::Basis::Constant;
      else if (th[1] == "cos") term.basis = CoefficientLedger::Basis::Cos;
      else if (th[1] == "sin") term.basis = CoefficientLedger::Basis::Sin;
      else if (th[1] == "monomial") term.basis = CoefficientLedger::Basis::Monomial;
      else throw ParseError("unknown ledger basis", rd.line());
      term.k = detail::parse_int_or_throw(th[2], rd.line());
      term.period = detail::parse_double_or_throw(th[3], rd.line());
      for (int i = 0; i < r; ++i) term.A.push_back(rd.matrix("A_" + std::to_string(i + 1), m, m));
      term.b = rd.vector("b", m);
      term.ybar = rd.vector("ybar", n - m);
      L.terms.push_back(std::move(term));
    }
    model.ledger() = std::move(L);
    tok = rd.next("'end'");
  }
  if (tok.size() != 1 || tok[0] != "end") throw ParseError("expected 'end'", rd.line());
  return {std::move(model), seed, std::move(meta)};
}

inline LoadedModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return read_model(in);
}

}  // namespace pdc

#endif  // PDC_IO_HPP
