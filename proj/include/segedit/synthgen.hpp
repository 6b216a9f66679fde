#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "segedit/tensor.hpp"

namespace segedit {

// Class ids used across the benchmark.
inline constexpr int kClassBackground = 0;
inline constexpr int kClassTarget = 1;
inline constexpr int kClassConfuser = 2;
inline constexpr int kNumClasses = 3;

enum class TextureTag : std::uint8_t { Porous = 0, Filled = 1 };  // serialized "A" / "B"

std::string texture_tag_name(TextureTag tag);
TextureTag texture_tag_from_name(const std::string& name);

// One synthetic sample: RGB image in [0,1], per-pixel class ids, per-pixel
// target instance ids (0 = none, k > 0 = k-th instance), and a texture tag
// per instance.
struct ImageSample {
  std::string id;
  Tensor image;                        // 3 x H x W
  std::vector<std::int32_t> class_map;  // H*W row-major
  std::vector<std::int32_t> instance_map;
  std::vector<TextureTag> texture_tags;  // index k-1 tags instance k
  int height = 0;
  int width = 0;

  int class_at(int r, int c) const { return class_map[static_cast<std::size_t>(r) * width + c]; }
  int instance_at(int r, int c) const {
    return instance_map[static_cast<std::size_t>(r) * width + c];
  }
  int instance_count() const { return static_cast<int>(texture_tags.size()); }
};

struct GeneratorConfig {
  int height = 128;
  int width = 128;
  int min_instances = 6;
  int max_instances = 10;
  int min_confusers = 3;
  int max_confusers = 5;
  int max_place_retries = 250;

  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

struct DatasetManifest {
  std::vector<std::string> train_ids;  // 6, named A..F
  std::vector<std::string> val_ids;    // 2
  std::vector<std::string> test_ids;   // 2
  std::uint64_t seed = 0;
  GeneratorConfig config;
  std::map<std::string, std::uint64_t> sample_seeds;

  std::vector<std::string> unseen_pool() const;  // val + test
  std::vector<std::string> all_ids() const;
};

struct Dataset {
  DatasetManifest manifest;
  std::map<std::string, ImageSample> samples;

  const ImageSample& at(const std::string& id) const;
};

// Procedural sample: mud-toned low-frequency background, elliptical target
// instances (porous or mud-filled fill), and wavy dotted confuser blobs whose
// tones overlap the porous texture.
ImageSample generate_sample(std::uint64_t seed, const GeneratorConfig& config,
                            const std::string& id = "sample");

// 6 train / 2 val / 2 test samples with per-sample seeds derived from the
// master seed; writes manifest + PNGs + per-sample metadata under `dir`.
Dataset generate_dataset(std::uint64_t seed, const GeneratorConfig& config,
                         const std::filesystem::path& dir);

Dataset load_dataset(const std::filesystem::path& dir);

void write_sample(const ImageSample& sample, const std::filesystem::path& dir);
ImageSample load_sample(const std::filesystem::path& dir, const std::string& id);

std::array<float, 3> extract_color(const Tensor& image, int row, int col);

// Covers an H x W canvas with copies of a square crop, top-left aligned.
Tensor tile_texture(const Tensor& source_image, int crop_row, int crop_col, int crop_size,
                    int out_height, int out_width);

// The reference background shade used for inpainting probes: the background
// pixel closest to the image center (deterministic row-major tie-break).
std::array<float, 3> reference_background_pixel(const ImageSample& sample, int* out_row = nullptr,
                                                int* out_col = nullptr);

// Checks every ImageSample invariant (label/instance consistency,
// connectivity, tag coverage, fill conformance); returns a list of violation
// descriptions, empty when sound.
std::vector<std::string> check_sample_invariants(const ImageSample& sample);

}  // namespace segedit
