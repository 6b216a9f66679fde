#include "segedit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "segedit/image_io.hpp"
#include "segedit/rng.hpp"

namespace segedit {

namespace {

using json = nlohmann::json;

constexpr float kMudBase[3] = {0.52f, 0.27f, 0.17f};
constexpr float kLightTone[3] = {0.80f, 0.78f, 0.74f};
constexpr float kDarkTone[3] = {0.45f, 0.43f, 0.41f};
constexpr float kRimTone[3] = {0.70f, 0.67f, 0.62f};
constexpr int kBackgroundCell = 16;
constexpr int kPlacementGap = 2;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Position hash for paint-time jitter; independent of iteration order.
float hash01(int x, int y, std::uint64_t salt) {
  std::uint64_t s = salt ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) ^
                    static_cast<std::uint32_t>(y);
  return static_cast<float>(splitmix64(s) >> 40) * 0x1.0p-24f;
}

float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

struct Shape {
  std::vector<int> pixels;  // row-major offsets
  float cx = 0, cy = 0;
};

// Low-frequency value noise in [-1, 1], bilinear over a coarse grid.
std::vector<float> make_noise_field(int h, int w, Rng& rng) {
  const int gh = h / kBackgroundCell + 2;
  const int gw = w / kBackgroundCell + 2;
  std::vector<float> grid(static_cast<std::size_t>(gh) * gw);
  for (auto& v : grid) v = rng.uniform(-1.0f, 1.0f);
  std::vector<float> field(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    const float fy = static_cast<float>(y) / kBackgroundCell;
    const int y0 = static_cast<int>(fy);
    const float ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const float fx = static_cast<float>(x) / kBackgroundCell;
      const int x0 = static_cast<int>(fx);
      const float tx = fx - x0;
      const float a = grid[static_cast<std::size_t>(y0) * gw + x0];
      const float b = grid[static_cast<std::size_t>(y0) * gw + x0 + 1];
      const float c = grid[static_cast<std::size_t>(y0 + 1) * gw + x0];
      const float d = grid[static_cast<std::size_t>(y0 + 1) * gw + x0 + 1];
      field[static_cast<std::size_t>(y) * w + x] =
          (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return field;
}

std::vector<int> ellipse_pixels(int h, int w, float cx, float cy, float rx, float ry,
                                float angle) {
  std::vector<int> px;
  const float cosA = std::cos(angle), sinA = std::sin(angle);
  const int reach = static_cast<int>(std::ceil(std::max(rx, ry))) + 1;
  const int y0 = std::max(0, static_cast<int>(cy) - reach);
  const int y1 = std::min(h - 1, static_cast<int>(cy) + reach);
  const int x0 = std::max(0, static_cast<int>(cx) - reach);
  const int x1 = std::min(w - 1, static_cast<int>(cx) + reach);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const float dx = static_cast<float>(x) - cx;
      const float dy = static_cast<float>(y) - cy;
      const float u = (dx * cosA + dy * sinA) / rx;
      const float v = (-dx * sinA + dy * cosA) / ry;
      if (u * u + v * v <= 1.0f) px.push_back(y * w + x);
    }
  }
  return px;
}

// Blob with a star-convex wobbled radius.
std::vector<int> blob_pixels(int h, int w, float cx, float cy, float r0, float wob1, float wob2,
                             float phase1, float phase2) {
  std::vector<int> px;
  const int reach = static_cast<int>(std::ceil(r0 * (1.0f + wob1 + wob2))) + 1;
  const int y0 = std::max(0, static_cast<int>(cy) - reach);
  const int y1 = std::min(h - 1, static_cast<int>(cy) + reach);
  const int x0 = std::max(0, static_cast<int>(cx) - reach);
  const int x1 = std::min(w - 1, static_cast<int>(cx) + reach);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const float dx = static_cast<float>(x) - cx;
      const float dy = static_cast<float>(y) - cy;
      const float dist = std::sqrt(dx * dx + dy * dy);
      const float phi = std::atan2(dy, dx);
      const float r = r0 * (1.0f + wob1 * std::sin(3.0f * phi + phase1) +
                            wob2 * std::sin(5.0f * phi + phase2));
      if (dist <= r) px.push_back(y * w + x);
    }
  }
  return px;
}

bool region_free(const std::vector<int>& pixels, const std::vector<std::uint8_t>& occupancy,
                 int h, int w) {
  for (int p : pixels) {
    const int y = p / w, x = p % w;
    if (y < 2 || y >= h - 2 || x < 2 || x >= w - 2) return false;
    if (occupancy[static_cast<std::size_t>(p)]) return false;
  }
  return true;
}

void stamp_dilated(const std::vector<int>& pixels, std::vector<std::uint8_t>& occupancy, int h,
                   int w) {
  for (int p : pixels) {
    const int y = p / w, x = p % w;
    for (int dy = -kPlacementGap; dy <= kPlacementGap; ++dy) {
      for (int dx = -kPlacementGap; dx <= kPlacementGap; ++dx) {
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        occupancy[static_cast<std::size_t>(yy) * w + xx] = 1;
      }
    }
  }
}

void set_pixel(Tensor& image, int plane, int offset, const float* tone, float jitter) {
  const std::size_t sz = static_cast<std::size_t>(plane);
  for (int c = 0; c < 3; ++c) {
    image[static_cast<std::size_t>(c) * sz + offset] = clamp01(tone[c] * (1.0f + jitter));
  }
}

struct PorousParams {
  float cell = 4.0f;
  float dot_radius = 1.3f;
  std::uint64_t salt = 0;
};

bool porous_dot(int x, int y, const PorousParams& p) {
  const int cx = static_cast<int>(std::floor(x / p.cell));
  const int cy = static_cast<int>(std::floor(y / p.cell));
  for (int ny = cy - 1; ny <= cy + 1; ++ny) {
    for (int nx = cx - 1; nx <= cx + 1; ++nx) {
      const float jx = hash01(nx, ny, p.salt) * 2.0f - 1.0f;
      const float jy = hash01(nx, ny, p.salt ^ 0x5bd1e995ULL) * 2.0f - 1.0f;
      const float dx = static_cast<float>(x) - (nx + 0.5f) * p.cell - jx;
      const float dy = static_cast<float>(y) - (ny + 0.5f) * p.cell - jy;
      if (dx * dx + dy * dy <= p.dot_radius * p.dot_radius) return true;
    }
  }
  return false;
}

struct WavyParams {
  float angle = 0, wavelength = 14, amplitude = 2.5f, row_spacing = 5.5f, dot_spacing = 3.5f;
  float dot_radius = 1.2f, phase = 0;
  float cx = 0, cy = 0;
};

bool wavy_dot(int x, int y, const WavyParams& p) {
  const float cosA = std::cos(p.angle), sinA = std::sin(p.angle);
  const float dx = static_cast<float>(x) - p.cx;
  const float dy = static_cast<float>(y) - p.cy;
  const float u = dx * cosA + dy * sinA;
  const float v = -dx * sinA + dy * cosA;
  const float vw = v - p.amplitude * std::sin(2.0f * 3.14159265f * u / p.wavelength + p.phase);
  const float du = u - p.dot_spacing * std::round(u / p.dot_spacing);
  const float dv = vw - p.row_spacing * std::round(vw / p.row_spacing);
  return du * du + dv * dv <= p.dot_radius * p.dot_radius;
}

}  // namespace

std::string texture_tag_name(TextureTag tag) {
  return tag == TextureTag::Porous ? "A" : "B";
}

TextureTag texture_tag_from_name(const std::string& name) {
  if (name == "A") return TextureTag::Porous;
  if (name == "B") return TextureTag::Filled;
  throw std::invalid_argument("unknown texture tag: " + name);
}

json GeneratorConfig::to_json() const {
  return json{{"height", height},
              {"width", width},
              {"min_instances", min_instances},
              {"max_instances", max_instances},
              {"min_confusers", min_confusers},
              {"max_confusers", max_confusers},
              {"max_place_retries", max_place_retries}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  GeneratorConfig c;
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.min_instances = j.value("min_instances", c.min_instances);
  c.max_instances = j.value("max_instances", c.max_instances);
  c.min_confusers = j.value("min_confusers", c.min_confusers);
  c.max_confusers = j.value("max_confusers", c.max_confusers);
  c.max_place_retries = j.value("max_place_retries", c.max_place_retries);
  return c;
}

std::vector<std::string> DatasetManifest::unseen_pool() const {
  std::vector<std::string> ids = val_ids;
  ids.insert(ids.end(), test_ids.begin(), test_ids.end());
  return ids;
}

std::vector<std::string> DatasetManifest::all_ids() const {
  std::vector<std::string> ids = train_ids;
  ids.insert(ids.end(), val_ids.begin(), val_ids.end());
  ids.insert(ids.end(), test_ids.begin(), test_ids.end());
  return ids;
}

const ImageSample& Dataset::at(const std::string& id) const {
  auto it = samples.find(id);
  if (it == samples.end()) throw std::invalid_argument("dataset has no sample with id " + id);
  return it->second;
}

ImageSample generate_sample(std::uint64_t seed, const GeneratorConfig& config,
                            const std::string& id) {
  const int h = config.height, w = config.width;
  require(h >= 64 && w >= 64, "generator: image dims must be >= 64");
  require(config.min_instances >= 2, "generator: need >= 2 instances to cover both textures");
  require(config.max_instances >= config.min_instances, "generator: bad instance range");
  require(config.min_confusers >= 1, "generator: need >= 1 confuser region");
  require(config.max_confusers >= config.min_confusers, "generator: bad confuser range");

  Rng rng(derive_seed(seed, 0xDA7A));
  const std::uint64_t paint_salt = derive_seed(seed, 0x9A17);

  // Background: a mud-toned low-frequency field, kept for fill painting.
  const std::vector<float> field = make_noise_field(h, w, rng);
  Tensor background({3, h, w});
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < h * w; ++i) {
      background[static_cast<std::size_t>(c) * h * w + i] =
          clamp01(kMudBase[c] * (1.0f + 0.12f * field[static_cast<std::size_t>(i)]));
    }
  }

  const int n_inst = rng.uniform_int(config.min_instances, config.max_instances);
  const int n_conf = rng.uniform_int(config.min_confusers, config.max_confusers);

  std::vector<std::uint8_t> occupancy(static_cast<std::size_t>(h) * w, 0);
  std::vector<Shape> instances;
  std::vector<Shape> confusers;

  auto place = [&](auto make_shape, const char* what) -> Shape {
    for (int attempt = 0; attempt < config.max_place_retries; ++attempt) {
      Shape s = make_shape();
      if (!s.pixels.empty() && region_free(s.pixels, occupancy, h, w)) {
        stamp_dilated(s.pixels, occupancy, h, w);
        return s;
      }
    }
    throw std::runtime_error(std::string("generator: could not place ") + what +
                             " within retry budget");
  };

  for (int k = 0; k < n_inst; ++k) {
    instances.push_back(place(
        [&]() {
          Shape s;
          const float rx = rng.uniform(6.0f, 14.0f);
          const float ry = rng.uniform(6.0f, 14.0f);
          const float angle = rng.uniform(0.0f, 3.14159265f);
          s.cx = rng.uniform(rx + 3.0f, static_cast<float>(w) - rx - 4.0f);
          s.cy = rng.uniform(ry + 3.0f, static_cast<float>(h) - ry - 4.0f);
          s.pixels = ellipse_pixels(h, w, s.cx, s.cy, rx, ry, angle);
          return s;
        },
        "target instance"));
  }
  for (int k = 0; k < n_conf; ++k) {
    confusers.push_back(place(
        [&]() {
          Shape s;
          const float r0 = rng.uniform(7.0f, 13.0f);
          const float wob1 = rng.uniform(0.12f, 0.22f);
          const float wob2 = rng.uniform(0.05f, 0.12f);
          const float p1 = rng.uniform(0.0f, 6.2831853f);
          const float p2 = rng.uniform(0.0f, 6.2831853f);
          const float reach = r0 * 1.45f;
          s.cx = rng.uniform(reach + 3.0f, static_cast<float>(w) - reach - 4.0f);
          s.cy = rng.uniform(reach + 3.0f, static_cast<float>(h) - reach - 4.0f);
          s.pixels = blob_pixels(h, w, s.cx, s.cy, r0, wob1, wob2, p1, p2);
          return s;
        },
        "confuser region"));
  }

  // Texture tags; both kinds must appear.
  std::vector<TextureTag> tags;
  tags.reserve(instances.size());
  for (std::size_t k = 0; k < instances.size(); ++k) {
    tags.push_back(rng.next_float() < 0.5f ? TextureTag::Porous : TextureTag::Filled);
  }
  const bool any_porous = std::any_of(tags.begin(), tags.end(),
                                      [](TextureTag t) { return t == TextureTag::Porous; });
  const bool any_filled = std::any_of(tags.begin(), tags.end(),
                                      [](TextureTag t) { return t == TextureTag::Filled; });
  if (!any_porous) tags.back() = TextureTag::Porous;
  if (!any_filled) tags.back() = TextureTag::Filled;

  ImageSample sample;
  sample.id = id;
  sample.height = h;
  sample.width = w;
  sample.image = background;
  sample.class_map.assign(static_cast<std::size_t>(h) * w, kClassBackground);
  sample.instance_map.assign(static_cast<std::size_t>(h) * w, 0);
  sample.texture_tags = tags;

  for (std::size_t k = 0; k < instances.size(); ++k) {
    const Shape& shape = instances[k];
    const int inst_id = static_cast<int>(k) + 1;
    const std::uint64_t salt = paint_salt ^ (0x1000 + k);
    for (int p : shape.pixels) {
      sample.class_map[static_cast<std::size_t>(p)] = kClassTarget;
      sample.instance_map[static_cast<std::size_t>(p)] = inst_id;
    }
    if (tags[k] == TextureTag::Porous) {
      PorousParams pp;
      pp.salt = salt;
      for (int p : shape.pixels) {
        const int y = p / w, x = p % w;
        const float jitter = (hash01(x, y, salt ^ 0xF00D) - 0.5f) * 0.06f;
        set_pixel(sample.image, h * w, p, porous_dot(x, y, pp) ? kDarkTone : kLightTone, jitter);
      }
    } else {
      // Mud-filled: interior stays within +-5% of the local background shade;
      // a 1 px rim marks the outline (filled targets are annotatable but
      // blend in).
      std::vector<std::uint8_t> member(static_cast<std::size_t>(h) * w, 0);
      for (int p : shape.pixels) member[static_cast<std::size_t>(p)] = 1;
      const float inst_shift = rng.uniform(-0.035f, 0.035f);
      for (int p : shape.pixels) {
        const int y = p / w, x = p % w;
        bool boundary = false;
        const int ny[4] = {y - 1, y + 1, y, y};
        const int nx[4] = {x, x, x - 1, x + 1};
        for (int i = 0; i < 4; ++i) {
          if (ny[i] < 0 || ny[i] >= h || nx[i] < 0 || nx[i] >= w ||
              !member[static_cast<std::size_t>(ny[i]) * w + nx[i]]) {
            boundary = true;
            break;
          }
        }
        if (boundary) {
          const float jitter = (hash01(x, y, salt ^ 0xBEEF) - 0.5f) * 0.05f;
          set_pixel(sample.image, h * w, p, kRimTone, jitter);
        } else {
          const float jitter = (hash01(x, y, salt ^ 0xCAFE) - 0.5f) * 0.024f;
          const float shift = std::clamp(inst_shift + jitter, -0.05f, 0.05f);
          for (int c = 0; c < 3; ++c) {
            const std::size_t idx = static_cast<std::size_t>(c) * h * w + p;
            sample.image[idx] = clamp01(background[idx] * (1.0f + shift));
          }
        }
      }
    }
  }

  for (std::size_t k = 0; k < confusers.size(); ++k) {
    const Shape& shape = confusers[k];
    const std::uint64_t salt = paint_salt ^ (0x2000 + k);
    WavyParams wp;
    wp.angle = rng.uniform(0.0f, 3.14159265f);
    wp.wavelength = rng.uniform(12.0f, 18.0f);
    wp.amplitude = rng.uniform(2.0f, 3.0f);
    wp.row_spacing = rng.uniform(5.0f, 6.0f);
    wp.dot_spacing = rng.uniform(3.0f, 4.0f);
    wp.dot_radius = rng.uniform(1.1f, 1.4f);
    wp.phase = rng.uniform(0.0f, 6.2831853f);
    wp.cx = shape.cx;
    wp.cy = shape.cy;
    for (int p : shape.pixels) {
      const int y = p / w, x = p % w;
      sample.class_map[static_cast<std::size_t>(p)] = kClassConfuser;
      const float jitter = (hash01(x, y, salt) - 0.5f) * 0.06f;
      set_pixel(sample.image, h * w, p, wavy_dot(x, y, wp) ? kDarkTone : kLightTone, jitter);
    }
  }

  return sample;
}

Dataset generate_dataset(std::uint64_t seed, const GeneratorConfig& config,
                         const std::filesystem::path& dir) {
  static const char* kIds[10] = {"A", "B", "C", "D", "E", "F", "G", "H", "I", "J"};
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create dataset directory " + dir.string());

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.config = config;
  for (int i = 0; i < 10; ++i) {
    const std::string id = kIds[i];
    const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    manifest.sample_seeds[id] = sample_seed;
    if (i < 6) {
      manifest.train_ids.push_back(id);
    } else if (i < 8) {
      manifest.val_ids.push_back(id);
    } else {
      manifest.test_ids.push_back(id);
    }
    ImageSample sample = generate_sample(sample_seed, config, id);
    write_sample(sample, dir);
  }

  json j{{"seed", seed},
         {"splits",
          {{"train", manifest.train_ids}, {"val", manifest.val_ids}, {"test", manifest.test_ids}}},
         {"config", config.to_json()},
         {"sample_seeds", manifest.sample_seeds}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << "\n";
  out.close();

  return load_dataset(dir);
}

void write_sample(const ImageSample& sample, const std::filesystem::path& dir) {
  const int h = sample.height, w = sample.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  std::vector<std::uint8_t> rgb(plane * 3);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = sample.image[static_cast<std::size_t>(c) * plane + i];
      rgb[i * 3 + static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(std::lround(clamp01(v) * 255.0f));
    }
  }
  write_png_rgb8(dir / (sample.id + "_image.png"), w, h, rgb);

  std::vector<std::uint8_t> cls(plane);
  for (std::size_t i = 0; i < plane; ++i) cls[i] = static_cast<std::uint8_t>(sample.class_map[i]);
  write_png_gray8(dir / (sample.id + "_class.png"), w, h, cls);

  std::vector<std::uint16_t> inst(plane);
  for (std::size_t i = 0; i < plane; ++i)
    inst[i] = static_cast<std::uint16_t>(sample.instance_map[i]);
  write_png_gray16(dir / (sample.id + "_inst.png"), w, h, inst);

  json tags = json::object();
  for (std::size_t k = 0; k < sample.texture_tags.size(); ++k) {
    tags[std::to_string(k + 1)] = texture_tag_name(sample.texture_tags[k]);
  }
  json meta{{"id", sample.id}, {"texture_tags", tags}};
  std::ofstream out(dir / (sample.id + "_meta.json"));
  if (!out) throw std::runtime_error("cannot write sample metadata for " + sample.id);
  out << meta.dump(2) << "\n";
}

ImageSample load_sample(const std::filesystem::path& dir, const std::string& id) {
  Rgb8Image rgb = read_png_rgb8(dir / (id + "_image.png"));
  Gray8Image cls = read_png_gray8(dir / (id + "_class.png"));
  Gray16Image inst = read_png_gray16(dir / (id + "_inst.png"));
  if (cls.width != rgb.width || cls.height != rgb.height || inst.width != rgb.width ||
      inst.height != rgb.height) {
    throw std::runtime_error("sample " + id + " has inconsistent image dimensions");
  }

  ImageSample sample;
  sample.id = id;
  sample.width = rgb.width;
  sample.height = rgb.height;
  const std::size_t plane = static_cast<std::size_t>(rgb.width) * rgb.height;
  sample.image = Tensor({3, rgb.height, rgb.width});
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      sample.image[static_cast<std::size_t>(c) * plane + i] =
          static_cast<float>(rgb.pixels[i * 3 + static_cast<std::size_t>(c)]) / 255.0f;
    }
  }
  sample.class_map.assign(plane, 0);
  sample.instance_map.assign(plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    sample.class_map[i] = cls.pixels[i];
    sample.instance_map[i] = inst.pixels[i];
  }

  std::ifstream meta_in(dir / (id + "_meta.json"));
  if (!meta_in) throw std::runtime_error("missing metadata for sample " + id);
  json meta = json::parse(meta_in);
  const auto& tags = meta.at("texture_tags");
  sample.texture_tags.resize(tags.size());
  for (auto it = tags.begin(); it != tags.end(); ++it) {
    const int inst_id = std::stoi(it.key());
    sample.texture_tags[static_cast<std::size_t>(inst_id - 1)] =
        texture_tag_from_name(it.value().get<std::string>());
  }
  return sample;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("missing manifest.json in " + dir.string());
  json j = json::parse(in);

  Dataset ds;
  ds.manifest.seed = j.at("seed").get<std::uint64_t>();
  ds.manifest.train_ids = j.at("splits").at("train").get<std::vector<std::string>>();
  ds.manifest.val_ids = j.at("splits").at("val").get<std::vector<std::string>>();
  ds.manifest.test_ids = j.at("splits").at("test").get<std::vector<std::string>>();
  ds.manifest.config = GeneratorConfig::from_json(j.at("config"));
  if (j.contains("sample_seeds")) {
    for (auto it = j["sample_seeds"].begin(); it != j["sample_seeds"].end(); ++it) {
      ds.manifest.sample_seeds[it.key()] = it.value().get<std::uint64_t>();
    }
  }
  for (const std::string& id : ds.manifest.all_ids()) {
    ds.samples[id] = load_sample(dir, id);
  }
  return ds;
}

std::array<float, 3> extract_color(const Tensor& image, int row, int col) {
  require(image.rank() == 3 && image.dim(0) == 3,
          "extract_color: image must be 3xHxW, got " + image.shape_str());
  const int h = image.dim(1), w = image.dim(2);
  require(row >= 0 && row < h && col >= 0 && col < w,
          "extract_color: pixel (" + std::to_string(row) + "," + std::to_string(col) +
              ") out of bounds for " + image.shape_str());
  return {image.at3(0, row, col), image.at3(1, row, col), image.at3(2, row, col)};
}

Tensor tile_texture(const Tensor& source_image, int crop_row, int crop_col, int crop_size,
                    int out_height, int out_width) {
  require(source_image.rank() == 3 && source_image.dim(0) == 3,
          "tile_texture: source must be 3xHxW");
  require(crop_size >= 4, "tile_texture: crop size must be >= 4");
  const int h = source_image.dim(1), w = source_image.dim(2);
  require(crop_row >= 0 && crop_col >= 0 && crop_row + crop_size <= h &&
              crop_col + crop_size <= w,
          "tile_texture: crop (" + std::to_string(crop_row) + "," + std::to_string(crop_col) +
              "," + std::to_string(crop_size) + ") out of bounds for " + source_image.shape_str());
  require(out_height >= 1 && out_width >= 1, "tile_texture: output dims must be positive");

  Tensor out({3, out_height, out_width});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < out_height; ++y) {
      for (int x = 0; x < out_width; ++x) {
        out.at3(c, y, x) = source_image.at3(c, crop_row + y % crop_size, crop_col + x % crop_size);
      }
    }
  }
  return out;
}

std::array<float, 3> reference_background_pixel(const ImageSample& sample, int* out_row,
                                                int* out_col) {
  const float cy = (sample.height - 1) / 2.0f;
  const float cx = (sample.width - 1) / 2.0f;
  float best = -1.0f;
  int br = -1, bc = -1;
  for (int y = 0; y < sample.height; ++y) {
    for (int x = 0; x < sample.width; ++x) {
      if (sample.class_at(y, x) != kClassBackground) continue;
      const float d = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      if (best < 0.0f || d < best) {
        best = d;
        br = y;
        bc = x;
      }
    }
  }
  if (br < 0) throw std::runtime_error("sample " + sample.id + " has no background pixels");
  if (out_row) *out_row = br;
  if (out_col) *out_col = bc;
  return extract_color(sample.image, br, bc);
}

std::vector<std::string> check_sample_invariants(const ImageSample& sample) {
  std::vector<std::string> issues;
  const int h = sample.height, w = sample.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  if (sample.image.shape() != std::vector<int>{3, h, w}) {
    issues.push_back("image shape mismatch");
    return issues;
  }
  if (sample.class_map.size() != plane || sample.instance_map.size() != plane) {
    issues.push_back("label map size mismatch");
    return issues;
  }
  for (std::size_t i = 0; i < sample.image.size(); ++i) {
    const float v = sample.image[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      issues.push_back("image value out of [0,1]");
      break;
    }
  }

  int max_id = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    const int cls = sample.class_map[i];
    const int inst = sample.instance_map[i];
    if (cls < 0 || cls > 2) {
      issues.push_back("class id out of range at offset " + std::to_string(i));
      return issues;
    }
    if ((inst != 0) != (cls == kClassTarget)) {
      issues.push_back("instance/class inconsistency at offset " + std::to_string(i));
      return issues;
    }
    max_id = std::max(max_id, inst);
  }

  const int k = sample.instance_count();
  if (max_id != k) {
    issues.push_back("instance ids not contiguous: max id " + std::to_string(max_id) +
                     " vs " + std::to_string(k) + " tags");
  }
  std::vector<int> areas(static_cast<std::size_t>(max_id) + 1, 0);
  for (std::size_t i = 0; i < plane; ++i) areas[static_cast<std::size_t>(sample.instance_map[i])]++;
  for (int id = 1; id <= max_id; ++id) {
    if (areas[static_cast<std::size_t>(id)] == 0) {
      issues.push_back("instance id " + std::to_string(id) + " has no pixels");
    }
  }

  // 4-connectivity per instance via flood fill.
  for (int id = 1; id <= max_id; ++id) {
    if (areas[static_cast<std::size_t>(id)] == 0) continue;
    std::size_t start = plane;
    for (std::size_t i = 0; i < plane; ++i) {
      if (sample.instance_map[i] == id) {
        start = i;
        break;
      }
    }
    std::vector<std::uint8_t> seen(plane, 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    int visited = 0;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      ++visited;
      const int y = static_cast<int>(p) / w, x = static_cast<int>(p) % w;
      const int ny[4] = {y - 1, y + 1, y, y};
      const int nx[4] = {x, x, x - 1, x + 1};
      for (int i = 0; i < 4; ++i) {
        if (ny[i] < 0 || ny[i] >= h || nx[i] < 0 || nx[i] >= w) continue;
        const std::size_t q = static_cast<std::size_t>(ny[i]) * w + nx[i];
        if (!seen[q] && sample.instance_map[q] == id) {
          seen[q] = 1;
          queue.push_back(q);
        }
      }
    }
    if (visited != areas[static_cast<std::size_t>(id)]) {
      issues.push_back("instance id " + std::to_string(id) + " is not 4-connected");
    }
  }

  bool any_porous = false, any_filled = false;
  for (TextureTag t : sample.texture_tags) {
    any_porous |= t == TextureTag::Porous;
    any_filled |= t == TextureTag::Filled;
  }
  if (!any_porous) issues.push_back("no porous-texture instance");
  if (!any_filled) issues.push_back("no mud-filled instance");

  const bool any_confuser = std::any_of(sample.class_map.begin(), sample.class_map.end(),
                                        [](std::int32_t c) { return c == kClassConfuser; });
  if (!any_confuser) issues.push_back("no confuser region");

  return issues;
}

}  // namespace segedit
