#pragma once

#include <string>
#include <vector>

#include "jrt/env.hpp"

namespace jrt {

// House bank: `JRTHOUSE v1` header, then per-house binary records
// (domain, seed, grid, rooms, doors). Image bank: `JRTIMG v1` header, count,
// then 3x32x32 little-endian float payloads. Both are bit-stable for a fixed
// generation seed.

void save_house_bank(const std::vector<HousePlan>& houses, const std::string& path);
std::vector<HousePlan> load_house_bank(const std::string& path);

void save_image_bank(const std::vector<Tensor>& images, const std::string& path);
std::vector<Tensor> load_image_bank(const std::string& path);

/// Generate `count` houses of a domain from consecutive derived seeds.
/// `split_tag` keeps train/val/test banks disjoint for one base seed.
std::vector<HousePlan> generate_houses(Domain domain, int count, uint64_t seed,
                                       const std::string& split_tag);

/// n observations rendered at uniformly sampled valid poses across the given
/// houses, each in its own domain style. Deterministic in seed.
std::vector<Tensor> sample_images(const std::vector<HousePlan>& houses, int n, uint64_t seed);

}  // namespace jrt
