#include "jrt/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace jrt {

void save_checkpoint(const ParamSet& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out << "JRTCKPT v1\n";
  uint64_t offset = 0;
  for (const auto& name : params.order) {
    const auto& e = params.at(name);
    out << name;
    for (int d : e.value.shape) out << ' ' << d;
    out << ' ' << offset << '\n';
    offset += static_cast<uint64_t>(e.value.size()) * sizeof(float);
  }
  out << '\n';
  for (const auto& name : params.order) {
    const auto& e = params.at(name);
    out.write(reinterpret_cast<const char*>(e.value.data.data()),
              static_cast<std::streamsize>(e.value.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

ParamSet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "JRTCKPT v1")
    throw std::runtime_error("checkpoint: bad magic in " + path);

  struct Rec {
    std::string name;
    Shape shape;
    uint64_t offset;
  };
  std::vector<Rec> recs;
  while (std::getline(in, line) && !line.empty()) {
    std::istringstream ls(line);
    Rec r;
    ls >> r.name;
    std::vector<uint64_t> nums;
    uint64_t v;
    while (ls >> v) nums.push_back(v);
    if (r.name.empty() || nums.size() < 2)
      throw std::runtime_error("checkpoint: malformed manifest line in " + path);
    r.offset = nums.back();
    nums.pop_back();
    for (uint64_t d : nums) r.shape.push_back(static_cast<int>(d));
    recs.push_back(std::move(r));
  }

  std::streampos payload_start = in.tellg();
  ParamSet ps;
  for (const auto& r : recs) {
    Tensor t(r.shape);
    in.seekg(payload_start + static_cast<std::streamoff>(r.offset));
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated payload in " + path);
    ps.add(r.name, std::move(t));
  }
  return ps;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace jrt
