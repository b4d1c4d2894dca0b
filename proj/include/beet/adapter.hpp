#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "beet/backends.hpp"

namespace beet {

// Adapter protocol: one JSON object per line on the child's stdin/stdout,
// one request in flight at a time.
//
//   request   {"op":"instances"|"segment"|"markers", "image":"<png path>",
//              "patch_size":[w,h]}            (patch_size only for "segment")
//   response  {"ok":true,"instances":[{"mask":"<png>","box":[x0,y0,x1,y1],"score":s}]}
//             {"ok":true,"mask":"<png>"}
//             {"ok":true,"markers":[{"obb":{"cx","cy","w","h","angle"},
//                                    "class":"Ruler|Sign","score":s}]}
//             {"ok":false,"error":"..."}
//
// Rasters travel as PNG files; relative paths in responses resolve against
// the scratch directory.

struct AdapterConfig {
  std::string command;  // run through /bin/sh -c
  std::chrono::milliseconds timeout{60'000};
  /// Shared directory for PNG exchange; empty creates a private temp dir.
  std::filesystem::path scratch_dir;
};

namespace protocol {

std::string instances_request(const std::filesystem::path& image);
std::string segment_request(const std::filesystem::path& patch, PatchSize size);
std::string markers_request(const std::filesystem::path& image);

// Encoders write masks as PNGs named <stem>_<n>.png under `dir` and refer
// to them as dir/name.
std::string encode_instances(const std::vector<InstanceDetection>& dets,
                             const std::filesystem::path& dir, std::string_view stem);
std::string encode_segment(const SemanticMask& mask, const std::filesystem::path& dir,
                           std::string_view stem);
std::string encode_markers(const std::vector<MarkerDetection>& dets);
std::string encode_error(std::string_view message);

// Decoders check every interface invariant and throw BackendError
// ("protocol violation: ...") quoting an excerpt of the offending line.
std::vector<InstanceDetection> decode_instances(std::string_view line, const ImageRef& image,
                                                const std::filesystem::path& scratch);
SemanticMask decode_segment(std::string_view line, PatchSize expected,
                            const std::filesystem::path& scratch);
std::vector<MarkerDetection> decode_markers(std::string_view line);

}  // namespace protocol

/// Child process speaking the adapter protocol. Serves all three interfaces
/// through one process; calls are serialized.
class ExternalAdapter final : public InstanceSegmenter,
                              public PatchSegmenter,
                              public MarkerDetector {
 public:
  explicit ExternalAdapter(AdapterConfig config);
  ~ExternalAdapter() override;
  ExternalAdapter(const ExternalAdapter&) = delete;
  ExternalAdapter& operator=(const ExternalAdapter&) = delete;

  std::vector<InstanceDetection> detect_instances(const ImageRef& image) override;
  SemanticMask segment(const PatchRequest& request) override;
  std::vector<MarkerDetection> detect_markers(const ImageRef& image) override;

  Backends backends() { return {this, this, this}; }
  const std::filesystem::path& scratch_dir() const noexcept { return scratch_; }

 private:
  std::string round_trip(const std::string& request);
  std::filesystem::path image_path(const ImageRef& image);
  void start();
  void stop() noexcept;

  AdapterConfig config_;
  std::filesystem::path scratch_;
  bool owns_scratch_ = false;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;  // bytes read past the last newline
  std::size_t counter_ = 0;
  std::mutex mutex_;
};

}  // namespace beet
