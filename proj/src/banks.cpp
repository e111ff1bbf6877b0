#include "jrt/banks.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace jrt {

namespace {

// All multi-byte fields are little-endian. This code assumes a little-endian
// host and writes raw integers/floats.

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("bank: truncated file");
  return v;
}

void expect_header(std::istream& is, const std::string& want, const std::string& path) {
  std::string line;
  if (!std::getline(is, line) || line != want)
    throw std::runtime_error(path + ": bad header, expected `" + want + "`");
}

}  // namespace

void save_house_bank(const std::vector<HousePlan>& houses, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("house bank: cannot open " + path);
  os << "JRTHOUSE v1\n";
  put<uint32_t>(os, static_cast<uint32_t>(houses.size()));
  for (const auto& h : houses) {
    put<uint8_t>(os, static_cast<uint8_t>(h.domain));
    put<uint64_t>(os, h.seed);
    put<uint16_t>(os, static_cast<uint16_t>(h.width));
    put<uint16_t>(os, static_cast<uint16_t>(h.height));
    for (Cell c : h.grid) put<uint8_t>(os, static_cast<uint8_t>(c));
    put<uint16_t>(os, static_cast<uint16_t>(h.rooms.size()));
    for (const auto& r : h.rooms) {
      put<uint16_t>(os, static_cast<uint16_t>(r.x));
      put<uint16_t>(os, static_cast<uint16_t>(r.y));
      put<uint16_t>(os, static_cast<uint16_t>(r.w));
      put<uint16_t>(os, static_cast<uint16_t>(r.h));
      put<uint8_t>(os, static_cast<uint8_t>(r.type));
    }
    put<uint16_t>(os, static_cast<uint16_t>(h.doors.size()));
    for (const auto& d : h.doors) {
      put<uint16_t>(os, static_cast<uint16_t>(d.room_i));
      put<uint16_t>(os, static_cast<uint16_t>(d.room_j));
      put<uint16_t>(os, static_cast<uint16_t>(d.cx));
      put<uint16_t>(os, static_cast<uint16_t>(d.cy));
      put<int16_t>(os, static_cast<int16_t>(d.cx2));
      put<int16_t>(os, static_cast<int16_t>(d.cy2));
    }
  }
  if (!os) throw std::runtime_error("house bank: write failed for " + path);
}

std::vector<HousePlan> load_house_bank(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("house bank: cannot open " + path);
  expect_header(is, "JRTHOUSE v1", path);
  uint32_t count = get<uint32_t>(is);
  std::vector<HousePlan> houses(count);
  for (auto& h : houses) {
    h.domain = static_cast<Domain>(get<uint8_t>(is));
    h.seed = get<uint64_t>(is);
    h.width = get<uint16_t>(is);
    h.height = get<uint16_t>(is);
    h.grid.resize(static_cast<size_t>(h.width) * h.height);
    for (auto& c : h.grid) c = static_cast<Cell>(get<uint8_t>(is));
    h.rooms.resize(get<uint16_t>(is));
    for (auto& r : h.rooms) {
      r.x = get<uint16_t>(is);
      r.y = get<uint16_t>(is);
      r.w = get<uint16_t>(is);
      r.h = get<uint16_t>(is);
      r.type = static_cast<RoomType>(get<uint8_t>(is));
    }
    h.doors.resize(get<uint16_t>(is));
    for (auto& d : h.doors) {
      d.room_i = get<uint16_t>(is);
      d.room_j = get<uint16_t>(is);
      d.cx = get<uint16_t>(is);
      d.cy = get<uint16_t>(is);
      d.cx2 = get<int16_t>(is);
      d.cy2 = get<int16_t>(is);
    }
    h.rebuild_room_of();
  }
  return houses;
}

void save_image_bank(const std::vector<Tensor>& images, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("image bank: cannot open " + path);
  os << "JRTIMG v1\n";
  put<uint32_t>(os, static_cast<uint32_t>(images.size()));
  for (const auto& img : images) {
    if (img.shape != Shape{3, kImgSize, kImgSize})
      throw std::invalid_argument("image bank: images must be 3x32x32");
    os.write(reinterpret_cast<const char*>(img.data.data()),
             static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("image bank: write failed for " + path);
}

std::vector<Tensor> load_image_bank(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("image bank: cannot open " + path);
  expect_header(is, "JRTIMG v1", path);
  uint32_t count = get<uint32_t>(is);
  std::vector<Tensor> images(count, Tensor({3, kImgSize, kImgSize}));
  for (auto& img : images) {
    is.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(float)));
    if (!is) throw std::runtime_error(path + ": truncated image payload");
  }
  return images;
}

std::vector<HousePlan> generate_houses(Domain domain, int count, uint64_t seed,
                                       const std::string& split_tag) {
  uint64_t split_hash = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : split_tag) split_hash = (split_hash ^ static_cast<uint8_t>(c)) * 0x100000001b3ULL;
  std::vector<HousePlan> houses;
  houses.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    houses.push_back(generate_house(domain, hash2(hash2(seed, split_hash), static_cast<uint64_t>(i))));
  return houses;
}

std::vector<Tensor> sample_images(const std::vector<HousePlan>& houses, int n, uint64_t seed) {
  if (houses.empty()) throw std::invalid_argument("sample_images: empty house bank");
  Rng rng(hash2(seed, 0x1A6E5ULL));
  std::vector<Tensor> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const HousePlan& h = houses[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(houses.size()) - 1))];
    AgentPose pose = sample_pose(h, rng);
    out.push_back(render_image(h, pose, h.domain));
  }
  return out;
}

}  // namespace jrt
