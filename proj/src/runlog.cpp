#include "ami/runlog.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ami/error.hpp"

namespace ami {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ConfigError, fmt::format("bad number '{}' in log", s));
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunLog::RunLog(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error(ErrorCode::InvalidArgument, "log needs at least one column");
}

void RunLog::append(const std::vector<double>& row) {
  if (row.size() != columns_.size()) {
    throw Error(ErrorCode::InvalidArgument, "row width does not match the header");
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

void RunLog::add_event(double t, std::string name, double value) {
  events_.push_back({t, std::move(name), value});
}

std::size_t RunLog::column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("log has no column '{}'", name));
  }
  return static_cast<std::size_t>(it - columns_.begin());
}

bool RunLog::has_column(const std::string& name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::vector<double> RunLog::series(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
  return out;
}

const LogEvent* RunLog::find_event(const std::string& name) const {
  for (const auto& e : events_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string RunLog::to_csv() const {
  fmt::memory_buffer buf;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    fmt::format_to(std::back_inserter(buf), "{}{}", c ? "," : "", columns_[c]);
  }
  buf.push_back('\n');
  const std::size_t w = columns_.size();
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      fmt::format_to(std::back_inserter(buf), "{}{:.17g}", c ? "," : "", data_[r * w + c]);
    }
    buf.push_back('\n');
  }
  return fmt::to_string(buf);
}

std::string RunLog::events_csv() const {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "t,event,value\n");
  for (const auto& e : events_) {
    fmt::format_to(std::back_inserter(buf), "{:.17g},{},{:.17g}\n", e.t, e.name, e.value);
  }
  return fmt::to_string(buf);
}

std::string RunLog::events_path(const std::string& log_path) {
  std::filesystem::path p(log_path);
  return (p.parent_path() / (p.stem().string() + ".events.csv")).string();
}

void RunLog::write(const std::string& path) const {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  std::ofstream ev(events_path(path), std::ios::binary);
  if (!out || !ev) throw Error(ErrorCode::ConfigError, fmt::format("cannot write '{}'", path));
  out << to_csv();
  ev << events_csv();
}

RunLog RunLog::parse(const std::string& csv, const std::string& events_csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, "empty log");
  RunLog log(split(line, ','));
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != log.columns_.size()) {
      throw Error(ErrorCode::ConfigError, "log row width does not match the header");
    }
    row.clear();
    for (const auto& c : cells) row.push_back(parse_number(c));
    log.append(row);
  }
  std::istringstream ev(events_csv);
  if (std::getline(ev, line)) {
    while (std::getline(ev, line)) {
      if (line.empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() != 3) throw Error(ErrorCode::ConfigError, "malformed events row");
      log.add_event(parse_number(cells[0]), cells[1], parse_number(cells[2]));
    }
  }
  return log;
}

RunLog RunLog::read(const std::string& path) {
  const std::string ev_path = events_path(path);
  return parse(read_file(path), std::filesystem::exists(ev_path) ? read_file(ev_path) : "");
}

}  // namespace ami
