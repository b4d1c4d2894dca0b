#include "beet/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <random>

#include "beet/error.hpp"
#include "beet/png_io.hpp"
#include "json.hpp"

namespace beet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kExcerptChars = 160;

std::string excerpt(std::string_view line) {
  if (line.size() <= kExcerptChars) return std::string(line);
  return std::string(line.substr(0, kExcerptChars)) + "...";
}

[[noreturn]] void violation(const std::string& what, std::string_view line) {
  throw BackendError("adapter", "protocol violation: " + what + " in '" + excerpt(line) + "'");
}

json parse_response(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    violation("malformed JSON", line);
  }
  if (!j.is_object()) violation("response is not an object", line);
  auto ok = j.find("ok");
  if (ok == j.end() || !ok->is_boolean()) violation("missing boolean 'ok'", line);
  if (!ok->get<bool>()) {
    auto err = j.find("error");
    const std::string msg = err != j.end() && err->is_string() ? err->get<std::string>()
                                                               : std::string("(no message)");
    throw BackendError("adapter", "reported an error: " + msg);
  }
  return j;
}

double number_field(const json& obj, const char* key, std::string_view line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) violation(std::string("missing number '") + key + "'", line);
  const double v = it->get<double>();
  if (!std::isfinite(v)) violation(std::string("non-finite '") + key + "'", line);
  return v;
}

fs::path path_field(const json& obj, const char* key, const fs::path& scratch,
                    std::string_view line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) violation(std::string("missing path '") + key + "'", line);
  fs::path p(it->get<std::string>());
  return p.is_relative() ? scratch / p : p;
}

std::string request(const char* op, const fs::path& image) {
  return json{{"op", op}, {"image", image.string()}}.dump();
}

void write_all(int fd, std::string_view data, std::chrono::steady_clock::time_point deadline) {
  while (!data.empty()) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw BackendError("adapter", "timed out writing request");
    pollfd p{fd, POLLOUT, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw BackendError("adapter", std::string("write to adapter failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

namespace protocol {

std::string instances_request(const fs::path& image) { return request("instances", image); }

std::string markers_request(const fs::path& image) { return request("markers", image); }

std::string segment_request(const fs::path& patch, PatchSize size) {
  return json{{"op", "segment"},
              {"image", patch.string()},
              {"patch_size", {size.width, size.height}}}
      .dump();
}

std::string encode_instances(const std::vector<InstanceDetection>& dets, const fs::path& dir,
                             std::string_view stem) {
  json arr = json::array();
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const fs::path path = dir / (std::string(stem) + "_" + std::to_string(i) + ".png");
    write_binary_png(path, dets[i].mask);
    const AxisAlignedBox& b = dets[i].box;
    arr.push_back({{"mask", path.string()},
                   {"box", {b.x_min, b.y_min, b.x_max, b.y_max}},
                   {"score", dets[i].score}});
  }
  return json{{"ok", true}, {"instances", std::move(arr)}}.dump();
}

std::string encode_segment(const SemanticMask& mask, const fs::path& dir, std::string_view stem) {
  const fs::path path = dir / (std::string(stem) + "_0.png");
  write_semantic_png(path, mask);
  return json{{"ok", true}, {"mask", path.string()}}.dump();
}

std::string encode_markers(const std::vector<MarkerDetection>& dets) {
  json arr = json::array();
  for (const MarkerDetection& d : dets) {
    arr.push_back({{"obb",
                    {{"cx", d.box.center().x},
                     {"cy", d.box.center().y},
                     {"w", d.box.width()},
                     {"h", d.box.height()},
                     {"angle", d.box.angle()}}},
                   {"class", std::string(to_string(d.cls))},
                   {"score", d.score}});
  }
  return json{{"ok", true}, {"markers", std::move(arr)}}.dump();
}

std::string encode_error(std::string_view message) {
  return json{{"ok", false}, {"error", std::string(message)}}.dump();
}

std::vector<InstanceDetection> decode_instances(std::string_view line, const ImageRef& image,
                                                const fs::path& scratch) {
  const json j = parse_response(line);
  auto arr = j.find("instances");
  if (arr == j.end() || !arr->is_array()) violation("missing array 'instances'", line);
  std::vector<InstanceDetection> out;
  for (const json& e : *arr) {
    if (!e.is_object()) violation("instance entry is not an object", line);
    auto box = e.find("box");
    if (box == e.end() || !box->is_array() || box->size() != 4) {
      violation("instance 'box' must be [x0,y0,x1,y1]", line);
    }
    for (const json& v : *box) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) violation("non-numeric box", line);
    }
    InstanceDetection d;
    d.box = {(*box)[0].get<double>(), (*box)[1].get<double>(), (*box)[2].get<double>(),
             (*box)[3].get<double>()};
    d.score = number_field(e, "score", line);
    const fs::path mask = path_field(e, "mask", scratch, line);
    try {
      d.mask = read_binary_png(mask);
    } catch (const IoError& err) {
      violation(std::string("unreadable mask (") + err.what() + ")", line);
    }
    out.push_back(std::move(d));
  }
  try {
    validate_instances(out, image);
  } catch (const ValidationError& err) {
    violation(err.what(), line);
  }
  return out;
}

SemanticMask decode_segment(std::string_view line, PatchSize expected, const fs::path& scratch) {
  const json j = parse_response(line);
  const fs::path path = path_field(j, "mask", scratch, line);
  SemanticMask mask;
  try {
    mask = read_semantic_png(path);
  } catch (const Error& err) {
    violation(std::string("unreadable mask (") + err.what() + ")", line);
  }
  try {
    validate_patch_mask(mask, expected);
  } catch (const ValidationError& err) {
    violation(err.what(), line);
  }
  return mask;
}

std::vector<MarkerDetection> decode_markers(std::string_view line) {
  const json j = parse_response(line);
  auto arr = j.find("markers");
  if (arr == j.end() || !arr->is_array()) violation("missing array 'markers'", line);
  std::vector<MarkerDetection> out;
  for (const json& e : *arr) {
    if (!e.is_object()) violation("marker entry is not an object", line);
    auto obb = e.find("obb");
    if (obb == e.end() || !obb->is_object()) violation("missing object 'obb'", line);
    auto cls = e.find("class");
    if (cls == e.end() || !cls->is_string()) violation("missing string 'class'", line);
    MarkerDetection d;
    try {
      d.cls = parse_marker_class(cls->get<std::string>());
      d.box = OrientedBox({number_field(*obb, "cx", line), number_field(*obb, "cy", line)},
                          number_field(*obb, "w", line), number_field(*obb, "h", line),
                          number_field(*obb, "angle", line));
    } catch (const ValidationError& err) {
      violation(err.what(), line);
    }
    d.score = number_field(e, "score", line);
    out.push_back(d);
  }
  try {
    validate_markers(out);
  } catch (const ValidationError& err) {
    violation(err.what(), line);
  }
  return out;
}

}  // namespace protocol

ExternalAdapter::ExternalAdapter(AdapterConfig config) : config_(std::move(config)) {
  if (config_.command.empty()) throw ValidationError("adapter command is empty");
  if (config_.timeout.count() <= 0) throw ValidationError("adapter timeout must be positive");
  if (config_.scratch_dir.empty()) {
    std::random_device rd;
    scratch_ = fs::temp_directory_path() /
               ("beet-adapter-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
    owns_scratch_ = true;
  } else {
    scratch_ = config_.scratch_dir;
  }
  std::error_code ec;
  fs::create_directories(scratch_, ec);
  if (ec) throw IoError("cannot create scratch directory " + scratch_.string() + ": " + ec.message());
  // A dead child must surface as an error from write(), not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
  start();
}

ExternalAdapter::~ExternalAdapter() {
  stop();
  if (owns_scratch_) {
    std::error_code ec;
    fs::remove_all(scratch_, ec);
  }
}

void ExternalAdapter::start() {
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw BackendError("adapter", "pipe failed");
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw BackendError("adapter", "pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    throw BackendError("adapter", "fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // the shell may not exec; kill the whole group later
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", config_.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  pending_.clear();
}

void ExternalAdapter::stop() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to finish; give it a moment before killing.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(2000);
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

std::string ExternalAdapter::round_trip(const std::string& req) {
  if (pid_ < 0) start();
  const auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  try {
    write_all(to_child_, req + "\n", deadline);
  } catch (...) {
    stop();
    throw;
  }

  char buf[4096];
  for (;;) {
    if (auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      ::kill(-pid_, SIGKILL);
      stop();
      throw BackendError("adapter", "no response within " +
                                        std::to_string(config_.timeout.count()) + " ms");
    }
    pollfd p{from_child_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      stop();
      throw BackendError("adapter", std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      int status = 0;
      ::close(to_child_);
      to_child_ = -1;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
      stop();
      if (WIFEXITED(status)) {
        throw BackendError("adapter", "adapter exited with status " +
                                          std::to_string(WEXITSTATUS(status)) +
                                          " before answering");
      }
      throw BackendError("adapter", "adapter terminated by signal " +
                                        std::to_string(WIFSIGNALED(status) ? WTERMSIG(status) : 0));
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

fs::path ExternalAdapter::image_path(const ImageRef& image) {
  std::error_code ec;
  if (!image.path.empty() && fs::exists(image.path, ec)) return image.path;
  if (!image.raster) {
    throw BackendError("adapter", "image '" + image.id + "' has neither a readable file nor pixels");
  }
  const fs::path p = scratch_ / ("image_" + std::to_string(counter_++) + ".png");
  write_rgb_png(p, *image.raster);
  return p;
}

std::vector<InstanceDetection> ExternalAdapter::detect_instances(const ImageRef& image) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string line = round_trip(protocol::instances_request(image_path(image)));
  return protocol::decode_instances(line, image, scratch_);
}

SemanticMask ExternalAdapter::segment(const PatchRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!request.patch) throw BackendError("adapter", "patch request without pixels");
  const fs::path p = scratch_ / ("patch_" + std::to_string(counter_++) + ".png");
  write_rgb_png(p, *request.patch);
  json req = json::parse(protocol::segment_request(p, request.transform.target));
  // Extra context so that ground-truth adapters can locate the crop.
  if (request.image) {
    const PatchTransform& t = request.transform;
    req["source"] = request.image->path.string();
    req["source_id"] = request.image->id;
    req["crop"] = {t.crop_x0, t.crop_y0, t.crop_x1, t.crop_y1};
  }
  const std::string line = round_trip(req.dump());
  std::error_code ec;
  fs::remove(p, ec);
  return protocol::decode_segment(line, request.transform.target, scratch_);
}

std::vector<MarkerDetection> ExternalAdapter::detect_markers(const ImageRef& image) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string line = round_trip(protocol::markers_request(image_path(image)));
  return protocol::decode_markers(line);
}

}  // namespace beet
