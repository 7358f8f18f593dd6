// Turns raw CD-pipeline sources (registry webhook payloads, FluxCD
// polling logs) into the preprocessed 4-column event format, and provides
// the live webhook collector and log follower.

#pragma once

#include "patmon/core.hpp"

#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace patmon {

// Unix seconds, floored; nullopt when the text is not an RFC 3339 instant.
std::optional<std::int64_t> rfc3339_to_unix(std::string_view text);

// Outcome of parsing one raw record. Exactly one of: event set, skip set
// (benign non-matching record), or error non-empty (rejection).
struct RecordParse {
  std::optional<Event> event;
  bool skip = false;
  std::string error;
};

// GitHub package webhook JSON: `time`, `package_name`, `package_tag`
// -> `create` event.
RecordParse parse_webhook(std::string_view body);

// FluxCD polling JSON: `ts` plus a msg of the form
// `Latest image tag for <registry-path> resolved to <tag>` -> `fetch`
// event named after the last path segment. Other messages are skipped.
RecordParse parse_fluxcd(std::string_view body);

// `<label> <field>... <timestamp>`, single-space-separated. Throws
// std::invalid_argument on empty or whitespace-bearing fields.
std::string format_event(const Event &e);

// Inverse of format_event for the 4-column create/fetch layout.
RecordParse parse_line(std::string_view line);

// Reads one event per non-blank line; throws std::runtime_error naming
// the line on malformed input or decreasing timestamps.
TimedDataWord read_event_log(std::istream &in);

// Serializes whole-line appends; concurrent writers never interleave.
class LineSink {
public:
  explicit LineSink(std::ostream &out) : out_(&out) {}
  void append(const std::string &line);
  std::size_t lines() const;

private:
  mutable std::mutex mu_;
  std::ostream *out_;
  std::size_t lines_ = 0;
};

struct SourceStats {
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::size_t rejected = 0;
  std::vector<std::string> diagnostics;
};

// Pipes line-delimited FluxCD JSON into the sink as `fetch` lines.
// Malformed lines are counted and the stream continues.
SourceStats follow(std::istream &in, LineSink &sink);

// Reads whitespace-concatenated webhook JSON documents (covers both
// pretty-printed and line-delimited files).
SourceStats drain_webhooks(std::istream &in, std::vector<Event> &out);
SourceStats drain_fluxcd(std::istream &in, std::vector<Event> &out);

struct PreprocessResult {
  std::vector<Event> events; // merged, timestamp-sorted
  SourceStats webhook;
  SourceStats fluxcd;
};

// Merges both sources by timestamp; webhook wins ties at equal seconds,
// arrival order is kept within a source. With rebase, the first event's
// timestamp is subtracted from every event.
PreprocessResult preprocess(const std::vector<std::istream *> &webhooks,
                            const std::vector<std::istream *> &fluxes,
                            bool rebase);

// HTTP service accepting POST /webhook deliveries; each accepted payload
// is appended to the sink as one formatted line (200), rejections get a
// 400 with a diagnostic body.
class Collector {
public:
  explicit Collector(LineSink &sink);
  ~Collector();

  Collector(const Collector &) = delete;
  Collector &operator=(const Collector &) = delete;

  // port 0 binds an ephemeral port; returns false when unbindable.
  bool bind(const std::string &host, int port);
  int port() const;

  bool listen(); // blocking; returns after stop()
  void stop();

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
  };
  Stats stats() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace patmon
