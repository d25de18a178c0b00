#pragma once

#include <string>
#include <vector>

namespace ami {

struct LogEvent {
  double t;
  std::string name;
  double value = 0.0;
};

/// Column-named numeric time series sampled on a uniform sim-rate grid, plus
/// a list of timestamped events. Rows are appended only.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return data_.size() / columns_.size(); }
  bool empty() const { return data_.empty(); }

  void append(const std::vector<double>& row);
  void add_event(double t, std::string name, double value = 0.0);

  /// Index of a column; throws InvalidArgument if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  double at(std::size_t row, std::size_t col) const { return data_[row * columns_.size() + col]; }
  std::vector<double> series(const std::string& name) const;

  const std::vector<LogEvent>& events() const { return events_; }
  /// First event with this name, or nullptr.
  const LogEvent* find_event(const std::string& name) const;

  /// CSV with a header row; every value printed with 17 significant digits.
  std::string to_csv() const;
  std::string events_csv() const;
  /// Writes <path> and, next to it, <stem>.events.csv.
  void write(const std::string& path) const;
  /// Reads a log written by write(); the events file is optional.
  static RunLog read(const std::string& path);
  static RunLog parse(const std::string& csv, const std::string& events_csv = {});

  static std::string events_path(const std::string& log_path);

 private:
  std::vector<std::string> columns_;
  std::vector<double> data_;
  std::vector<LogEvent> events_;
};

}  // namespace ami
