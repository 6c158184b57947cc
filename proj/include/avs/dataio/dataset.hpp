#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avs/dataio/synth.hpp"

namespace avs::dataio {

/// Sample identifier in the directory layout, e.g. "scene_0003/frame_00017".
std::string sample_id(int scene_id, int frame_index);
/// Inverse of sample_id; nullopt if the identifier is malformed.
std::optional<FrameRef> parse_sample_id(const std::string& id);

/// Train/val/test lists of sample identifiers.
struct SplitManifest {
  std::vector<std::string> train, val, test;

  /// Throws std::invalid_argument if an identifier appears twice.
  void validate() const;
  std::size_t size() const { return train.size() + val.size() + test.size(); }
  /// Text form: one "<split> <id>" per line.
  std::string to_string() const;
  static SplitManifest parse(const std::string& text);
  static SplitManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Writes `scene_XXXX/frame_YYYYY.{png,depth.png,wav}`, `intrinsics.ini` and
/// `split.manifest` under `root`. Every sample must share one set of intrinsics.
void export_dataset(const std::filesystem::path& root, const std::vector<SceneSample>& samples,
                    const SplitManifest& manifest);

enum class Split { Train, Val, Test };

/// Read-only handle over an on-disk dataset; sample files are read on demand.
class Dataset {
 public:
  struct Entry {
    std::string id;
    FrameRef ref;
    Split split = Split::Train;
  };

  /// Indexes `root` using `manifest`, or `root/split.manifest` when none is
  /// given; without either, every complete sample is placed in Train.
  /// Missing samples are excluded and reported through warnings().
  static Dataset open(const std::filesystem::path& root, const std::optional<SplitManifest>& manifest = std::nullopt);

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::size_t> indices(Split split) const;
  const geometry::CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Reads one sample; throws std::runtime_error on a corrupt or mis-shaped file.
  SceneSample load(std::size_t index) const;
  /// Like load, but returns nullopt and fills `diagnostic` instead of throwing.
  std::optional<SceneSample> try_load(std::size_t index, std::string* diagnostic = nullptr) const;

 private:
  std::filesystem::path root_;
  std::vector<Entry> entries_;
  geometry::CameraIntrinsics intrinsics_;
  int height_ = 0, width_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace avs::dataio
