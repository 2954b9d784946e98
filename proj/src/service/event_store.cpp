#include "conflictlens/service/event_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "conflictlens/error.hpp"

namespace fs = std::filesystem;

namespace conflictlens::service {

namespace {

[[noreturn]] void storage_error(const std::string& what) { throw Error(ErrorCode::StorageError, what); }

void write_all_fsync(const fs::path& path, const std::string& data, int flags) {
  const int fd = ::open(path.c_str(), flags | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) storage_error("open " + path.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      storage_error("write " + path.string() + ": " + std::strerror(err));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    storage_error("fsync " + path.string() + ": " + std::strerror(err));
  }
  ::close(fd);
}

void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) storage_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<SessionEvent> parse_event_log(const std::string& jsonl, std::size_t* valid_bytes) {
  std::vector<SessionEvent> events;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const bool last = nl == std::string::npos || jsonl.find_first_not_of(" \t\r\n", nl) == std::string::npos;
    const auto line = jsonl.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      if (nl == std::string::npos) break;
      pos = nl + 1;
      continue;
    }
    SessionEvent e;
    bool ok = nl != std::string::npos;
    if (ok) {
      try {
        e = nlohmann::json::parse(line).get<SessionEvent>();
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (last) break;  // torn tail
      throw Error(ErrorCode::StorageError, "corrupt event at line " + std::to_string(events.size() + 1));
    }
    events.push_back(std::move(e));
    pos = nl + 1;
  }
  if (valid_bytes) *valid_bytes = std::min(pos, jsonl.size());
  return events;
}

EventStore::EventStore(fs::path root, std::size_t snapshot_interval)
    : root_(std::move(root)), snapshot_interval_(snapshot_interval == 0 ? 1 : snapshot_interval) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) storage_error("cannot create data dir " + root_.string() + ": " + ec.message());
}

bool EventStore::valid_session_id(const std::string& id) noexcept {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

fs::path EventStore::dir(const std::string& session_id) const {
  if (!valid_session_id(session_id)) throw Error(ErrorCode::SessionNotFound, "no session " + session_id);
  return root_ / session_id;
}

bool EventStore::exists(const std::string& session_id) const {
  if (!valid_session_id(session_id)) return false;
  return fs::exists(root_ / session_id / "events.jsonl");
}

std::vector<std::string> EventStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const auto id = entry.path().filename().string();
    if (entry.is_directory() && exists(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void EventStore::append(const std::string& session_id, const SessionEvent& event, const Session& after) {
  const auto d = dir(session_id);
  const bool fresh = !fs::exists(d);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) storage_error("cannot create " + d.string() + ": " + ec.message());
  write_all_fsync(d / "events.jsonl", nlohmann::json(event).dump() + "\n", O_CREAT | O_APPEND);
  if (fresh) fsync_dir(root_);
  if (after_append_hook) after_append_hook(session_id, event.seq);
  if ((event.seq + 1) % static_cast<std::int64_t>(snapshot_interval_) == 0) write_snapshot(session_id, after);
}

void EventStore::write_snapshot(const std::string& session_id, const Session& s) const {
  const auto d = dir(session_id);
  const auto tmp = d / "snapshot.json.tmp";
  write_all_fsync(tmp, nlohmann::json{{"last_seq", s.last_seq}, {"session", s}}.dump(), O_CREAT | O_TRUNC);
  std::error_code ec;
  fs::rename(tmp, d / "snapshot.json", ec);
  if (ec) storage_error("cannot publish snapshot: " + ec.message());
  fsync_dir(d);
}

std::vector<SessionEvent> EventStore::read_events(const std::string& session_id) const {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, "no session " + session_id);
  return parse_event_log(read_file(dir(session_id) / "events.jsonl"));
}

Session EventStore::load(const std::string& session_id) {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, "no session " + session_id);
  const auto d = dir(session_id);
  const auto log_path = d / "events.jsonl";
  const auto raw = read_file(log_path);
  std::size_t valid = 0;
  const auto events = parse_event_log(raw, &valid);
  if (valid < raw.size()) fs::resize_file(log_path, valid);
  if (events.empty()) throw Error(ErrorCode::SessionNotFound, "session " + session_id + " has no events");

  Session s;
  std::size_t start = 0;
  try {
    if (fs::exists(d / "snapshot.json")) {
      const auto snap = nlohmann::json::parse(read_file(d / "snapshot.json"));
      auto candidate = snap.at("session").get<Session>();
      const auto seq = snap.at("last_seq").get<std::int64_t>();
      if (seq == candidate.last_seq && seq >= 0 && static_cast<std::size_t>(seq) < events.size()) {
        s = std::move(candidate);
        start = static_cast<std::size_t>(seq) + 1;
      }
    }
  } catch (const std::exception&) {
    s = Session{};
    start = 0;
  }
  try {
    for (std::size_t i = start; i < events.size(); ++i) s = transition(s, events[i]);
  } catch (const Error& e) {
    storage_error("session " + session_id + " log does not replay: " + e.what());
  }
  if (s.session_id != session_id) storage_error("session " + session_id + " log belongs to " + s.session_id);
  return s;
}

std::string EventStore::export_log(const std::string& session_id) const {
  if (!exists(session_id)) throw Error(ErrorCode::SessionNotFound, "no session " + session_id);
  const auto raw = read_file(dir(session_id) / "events.jsonl");
  std::size_t valid = 0;
  parse_event_log(raw, &valid);
  return raw.substr(0, valid);
}

Session EventStore::import_log(const std::string& jsonl) {
  std::vector<SessionEvent> events;
  Session s;
  try {
    events = parse_event_log(jsonl);
    s = replay(events);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("event log rejected: ") + e.what());
  }
  if (events.empty()) throw Error(ErrorCode::InvalidInput, "event log is empty");
  if (!valid_session_id(s.session_id)) throw Error(ErrorCode::InvalidInput, "bad session id in log");
  if (exists(s.session_id)) storage_error("session " + s.session_id + " already exists");

  std::string body;
  for (const auto& e : events) body += nlohmann::json(e).dump() + "\n";
  const auto d = dir(s.session_id);
  fs::create_directories(d);
  write_all_fsync(d / "events.jsonl", body, O_CREAT | O_TRUNC);
  fsync_dir(root_);
  write_snapshot(s.session_id, s);
  return s;
}

}  // namespace conflictlens::service
