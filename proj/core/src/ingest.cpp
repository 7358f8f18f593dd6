#include "patmon/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>

#include <httplib.h>
#include <json.hpp>

namespace patmon {

namespace {

// Hinnant's civil-from-days arithmetic; valid over the whole int range.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_leap(std::int64_t y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned k[] = {31, 28, 31, 30, 31, 30,
                                   31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y))
    return 29;
  return k[m - 1];
}

bool take_digits(std::string_view s, std::size_t &i, int count,
                 std::int64_t &out) {
  if (i + static_cast<std::size_t>(count) > s.size())
    return false;
  std::int64_t v = 0;
  for (int k = 0; k < count; ++k) {
    char c = s[i + static_cast<std::size_t>(k)];
    if (c < '0' || c > '9')
      return false;
    v = v * 10 + (c - '0');
  }
  i += static_cast<std::size_t>(count);
  out = v;
  return true;
}

} // namespace

std::optional<std::int64_t> rfc3339_to_unix(std::string_view s) {
  std::size_t i = 0;
  std::int64_t year, month, day, hour, minute, second;
  if (!take_digits(s, i, 4, year))
    return std::nullopt;
  if (i >= s.size() || s[i] != '-')
    return std::nullopt;
  ++i;
  if (!take_digits(s, i, 2, month))
    return std::nullopt;
  if (i >= s.size() || s[i] != '-')
    return std::nullopt;
  ++i;
  if (!take_digits(s, i, 2, day))
    return std::nullopt;
  if (i >= s.size() || (s[i] != 'T' && s[i] != 't' && s[i] != ' '))
    return std::nullopt;
  ++i;
  if (!take_digits(s, i, 2, hour))
    return std::nullopt;
  if (i >= s.size() || s[i] != ':')
    return std::nullopt;
  ++i;
  if (!take_digits(s, i, 2, minute))
    return std::nullopt;
  if (i >= s.size() || s[i] != ':')
    return std::nullopt;
  ++i;
  if (!take_digits(s, i, 2, second))
    return std::nullopt;

  if (month < 1 || month > 12 || day < 1 ||
      day > days_in_month(year, static_cast<unsigned>(month)))
    return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) // 60 admits leap seconds
    return std::nullopt;

  // Fractional seconds are floored away.
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9')
      ++i;
    if (i == start)
      return std::nullopt;
  }

  std::int64_t offset = 0;
  if (i >= s.size())
    return std::nullopt;
  if (s[i] == 'Z' || s[i] == 'z') {
    ++i;
  } else if (s[i] == '+' || s[i] == '-') {
    bool negative = s[i] == '-';
    ++i;
    std::int64_t oh, om;
    if (!take_digits(s, i, 2, oh))
      return std::nullopt;
    if (i >= s.size() || s[i] != ':')
      return std::nullopt;
    ++i;
    if (!take_digits(s, i, 2, om))
      return std::nullopt;
    if (oh > 23 || om > 59)
      return std::nullopt;
    offset = oh * 3600 + om * 60;
    if (negative)
      offset = -offset;
  } else {
    return std::nullopt;
  }
  if (i != s.size())
    return std::nullopt;

  std::int64_t days =
      days_from_civil(year, static_cast<unsigned>(month),
                      static_cast<unsigned>(day));
  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

RecordParse parse_webhook(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error &ex) {
    return {std::nullopt, false, std::string("invalid JSON: ") + ex.what()};
  }
  if (!j.is_object())
    return {std::nullopt, false, "webhook body is not a JSON object"};
  for (const char *field : {"time", "package_name", "package_tag"}) {
    if (!j.contains(field) || !j[field].is_string())
      return {std::nullopt, false,
              std::string("missing or non-string field '") + field + "'"};
  }
  std::string time = j["time"].get<std::string>();
  auto ts = rfc3339_to_unix(time);
  if (!ts)
    return {std::nullopt, false, "unparseable time '" + time + "'"};
  if (*ts < 0)
    return {std::nullopt, false, "timestamp '" + time + "' is before 1970"};
  Event e{"create",
          {DataValue::text(j["package_name"].get<std::string>()),
           DataValue::text(j["package_tag"].get<std::string>())},
          *ts};
  return {std::move(e), false, ""};
}

namespace {

constexpr std::string_view kFetchPrefix = "Latest image tag for ";
constexpr std::string_view kFetchSep = " resolved to ";

} // namespace

RecordParse parse_fluxcd(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error &ex) {
    return {std::nullopt, false, std::string("invalid JSON: ") + ex.what()};
  }
  if (!j.is_object() || !j.contains("msg") || !j["msg"].is_string())
    return {std::nullopt, true, ""}; // not a polling record
  std::string msg = j["msg"].get<std::string>();

  if (msg.rfind(kFetchPrefix, 0) != 0)
    return {std::nullopt, true, ""};
  std::size_t sep = msg.find(kFetchSep, kFetchPrefix.size());
  if (sep == std::string::npos)
    return {std::nullopt, true, ""};
  std::string path = msg.substr(kFetchPrefix.size(),
                                sep - kFetchPrefix.size());
  std::size_t slash = path.rfind('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t tag_start = sep + kFetchSep.size();
  std::size_t tag_end = tag_start;
  while (tag_end < msg.size() &&
         !std::isspace(static_cast<unsigned char>(msg[tag_end])))
    ++tag_end;
  std::string tag = msg.substr(tag_start, tag_end - tag_start);
  if (name.empty() || tag.empty())
    return {std::nullopt, true, ""};

  if (!j.contains("ts") || !j["ts"].is_string())
    return {std::nullopt, false, "polling record without a 'ts' field"};
  std::string time = j["ts"].get<std::string>();
  auto ts = rfc3339_to_unix(time);
  if (!ts)
    return {std::nullopt, false, "unparseable ts '" + time + "'"};
  if (*ts < 0)
    return {std::nullopt, false, "timestamp '" + time + "' is before 1970"};
  Event e{"fetch", {DataValue::text(name), DataValue::text(tag)}, *ts};
  return {std::move(e), false, ""};
}

std::string format_event(const Event &e) {
  auto check = [](const std::string &s, const char *what) {
    if (s.empty())
      throw std::invalid_argument(std::string(what) + " is empty");
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c)))
        throw std::invalid_argument(std::string(what) +
                                    " contains whitespace: '" + s + "'");
    }
  };
  check(e.label, "event label");
  if (e.timestamp < 0)
    throw std::invalid_argument("event timestamp is negative");
  std::string line = e.label;
  for (const auto &f : e.fields) {
    const std::string &text = f.as_text();
    check(text, "event field");
    line += ' ';
    line += text;
  }
  line += ' ';
  line += std::to_string(e.timestamp);
  return line;
}

RecordParse parse_line(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() &&
           std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start)
      cols.emplace_back(line.substr(start, i - start));
  }
  if (cols.size() != 4)
    return {std::nullopt, false,
            "expected 4 columns (label name tag timestamp), got " +
                std::to_string(cols.size())};
  std::int64_t ts = 0;
  auto [ptr, ec] = std::from_chars(cols[3].data(),
                                   cols[3].data() + cols[3].size(), ts);
  if (ec != std::errc() || ptr != cols[3].data() + cols[3].size() || ts < 0)
    return {std::nullopt, false,
            "timestamp '" + cols[3] + "' is not a non-negative integer"};
  Event e{std::move(cols[0]),
          {DataValue::text(std::move(cols[1])),
           DataValue::text(std::move(cols[2]))},
          ts};
  return {std::move(e), false, ""};
}

TimedDataWord read_event_log(std::istream &in) {
  TimedDataWord word;
  ValuePool pool; // log vocabularies are tiny next to the log length
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    RecordParse rp = parse_line(line);
    if (!rp.event)
      throw std::runtime_error("line " + std::to_string(lineno) + ": " +
                               rp.error);
    for (auto &f : rp.event->fields)
      f = pool.text(f.as_text());
    try {
      word.append(std::move(*rp.event));
    } catch (const std::invalid_argument &ex) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " +
                               ex.what());
    }
  }
  return word;
}

void LineSink::append(const std::string &line) {
  std::lock_guard<std::mutex> lock(mu_);
  *out_ << line << '\n';
  out_->flush();
  ++lines_;
}

std::size_t LineSink::lines() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lines_;
}

SourceStats follow(std::istream &in, LineSink &sink) {
  SourceStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    RecordParse rp = parse_fluxcd(line);
    if (rp.event) {
      try {
        sink.append(format_event(*rp.event));
        ++stats.accepted;
        continue;
      } catch (const std::exception &ex) {
        rp.error = ex.what();
      }
    } else if (rp.skip) {
      ++stats.skipped;
      continue;
    }
    ++stats.rejected;
    stats.diagnostics.push_back("line " + std::to_string(lineno) + ": " +
                                rp.error);
  }
  return stats;
}

SourceStats drain_webhooks(std::istream &in, std::vector<Event> &out) {
  SourceStats stats;
  std::size_t doc = 0;
  for (;;) {
    int c = in.peek();
    while (c != std::char_traits<char>::eof() &&
           std::isspace(static_cast<unsigned char>(c))) {
      in.get();
      c = in.peek();
    }
    if (c == std::char_traits<char>::eof())
      break;
    ++doc;
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error &ex) {
      ++stats.rejected;
      stats.diagnostics.push_back("webhook document " + std::to_string(doc) +
                                  ": " + ex.what());
      in.clear();
      std::string rest;
      if (!std::getline(in, rest))
        break;
      continue;
    }
    RecordParse rp = parse_webhook(j.dump());
    if (rp.event) {
      out.push_back(std::move(*rp.event));
      ++stats.accepted;
    } else {
      ++stats.rejected;
      stats.diagnostics.push_back("webhook document " + std::to_string(doc) +
                                  ": " + rp.error);
    }
  }
  return stats;
}

SourceStats drain_fluxcd(std::istream &in, std::vector<Event> &out) {
  SourceStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    RecordParse rp = parse_fluxcd(line);
    if (rp.event) {
      out.push_back(std::move(*rp.event));
      ++stats.accepted;
    } else if (rp.skip) {
      ++stats.skipped;
    } else {
      ++stats.rejected;
      stats.diagnostics.push_back("line " + std::to_string(lineno) + ": " +
                                  rp.error);
    }
  }
  return stats;
}

PreprocessResult preprocess(const std::vector<std::istream *> &webhooks,
                            const std::vector<std::istream *> &fluxes,
                            bool rebase) {
  PreprocessResult result;
  struct Tagged {
    Event event;
    int source; // 0 = webhook, 1 = fluxcd; webhook wins timestamp ties
  };
  std::vector<Tagged> all;

  for (std::istream *in : webhooks) {
    std::vector<Event> events;
    SourceStats s = drain_webhooks(*in, events);
    result.webhook.accepted += s.accepted;
    result.webhook.rejected += s.rejected;
    for (auto &d : s.diagnostics)
      result.webhook.diagnostics.push_back(std::move(d));
    for (auto &e : events)
      all.push_back({std::move(e), 0});
  }
  for (std::istream *in : fluxes) {
    std::vector<Event> events;
    SourceStats s = drain_fluxcd(*in, events);
    result.fluxcd.accepted += s.accepted;
    result.fluxcd.skipped += s.skipped;
    result.fluxcd.rejected += s.rejected;
    for (auto &d : s.diagnostics)
      result.fluxcd.diagnostics.push_back(std::move(d));
    for (auto &e : events)
      all.push_back({std::move(e), 1});
  }

  std::stable_sort(all.begin(), all.end(), [](const Tagged &a,
                                              const Tagged &b) {
    if (a.event.timestamp != b.event.timestamp)
      return a.event.timestamp < b.event.timestamp;
    return a.source < b.source;
  });

  if (rebase && !all.empty()) {
    std::int64_t base = all.front().event.timestamp;
    for (auto &t : all)
      t.event.timestamp -= base;
  }
  result.events.reserve(all.size());
  for (auto &t : all)
    result.events.push_back(std::move(t.event));
  return result;
}

struct Collector::Impl {
  LineSink *sink = nullptr;
  httplib::Server server;
  int port = -1;
  mutable std::mutex mu;
  Stats stats;
};

Collector::Collector(LineSink &sink) : impl_(std::make_unique<Impl>()) {
  impl_->sink = &sink;
  Impl *impl = impl_.get();
  impl->server.Post(
      "/webhook", [impl](const httplib::Request &req, httplib::Response &res) {
        RecordParse rp = parse_webhook(req.body);
        if (rp.event) {
          try {
            impl->sink->append(format_event(*rp.event));
            {
              std::lock_guard<std::mutex> lock(impl->mu);
              ++impl->stats.accepted;
            }
            res.status = 200;
            res.set_content("ok\n", "text/plain");
            return;
          } catch (const std::exception &ex) {
            rp.error = ex.what();
          }
        }
        {
          std::lock_guard<std::mutex> lock(impl->mu);
          ++impl->stats.rejected;
        }
        res.status = 400;
        res.set_content(rp.error + "\n", "text/plain");
      });
}

Collector::~Collector() { stop(); }

bool Collector::bind(const std::string &host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0)
      return false;
    impl_->port = bound;
    return true;
  }
  if (!impl_->server.bind_to_port(host, port))
    return false;
  impl_->port = port;
  return true;
}

int Collector::port() const { return impl_->port; }

bool Collector::listen() { return impl_->server.listen_after_bind(); }

void Collector::stop() { impl_->server.stop(); }

Collector::Stats Collector::stats() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->stats;
}

} // namespace patmon
