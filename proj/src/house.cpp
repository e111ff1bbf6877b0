#include "jrt/house.hpp"

#include <algorithm>
#include <stdexcept>

namespace jrt {

const char* domain_name(Domain d) { return d == Domain::Synthetic ? "syn" : "real"; }

const char* room_type_name(RoomType t) {
  switch (t) {
    case RoomType::Bedroom: return "bedroom";
    case RoomType::Bathroom: return "bathroom";
    case RoomType::Kitchen: return "kitchen";
    case RoomType::LivingRoom: return "living_room";
    case RoomType::Corridor: return "corridor";
  }
  return "?";
}

void HousePlan::rebuild_room_of() {
  room_of.assign(static_cast<size_t>(width) * height, -1);
  for (size_t i = 0; i < rooms.size(); ++i) {
    const Room& r = rooms[i];
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        room_of[static_cast<size_t>(y) * width + x] = static_cast<int16_t>(i);
  }
  for (const Door& d : doors) {
    room_of[static_cast<size_t>(d.cy) * width + d.cx] = static_cast<int16_t>(d.room_i);
    if (d.cx2 >= 0)
      room_of[static_cast<size_t>(d.cy2) * width + d.cx2] = static_cast<int16_t>(d.room_i);
  }
}

namespace {

constexpr int kMinRoomDim = 3;

struct Rect {
  int x, y, w, h;
};

struct EdgeCand {
  int a, b;                               // room indices, a < b
  std::vector<std::pair<int, int>> cells;  // wall cells that can become the door
};

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  }
  int find(int i) { return p[static_cast<size_t>(i)] == i ? i : p[static_cast<size_t>(i)] = find(p[static_cast<size_t>(i)]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[static_cast<size_t>(a)] = b;
    return true;
  }
};

bool try_generate(Domain domain, uint64_t seed, Rng& rng, HousePlan& out) {
  // desk-scale sizes: kept small enough that the actor-critic trainer reaches
  // usable success rates within a laptop step budget
  int target_rooms = domain == Domain::Synthetic ? rng.uniform_int(2, 3) : rng.uniform_int(5, 7);
  int interior = domain == Domain::Synthetic ? 9 : 15 + 2 * rng.uniform_int(0, 1);
  int W = interior + 2, H = interior + 2;

  // BSP split of the interior into room rectangles separated by 1-cell walls
  std::vector<Rect> leaves{{1, 1, interior, interior}};
  while (static_cast<int>(leaves.size()) < target_rooms) {
    int best = -1, best_area = 0;
    for (size_t i = 0; i < leaves.size(); ++i) {
      const Rect& r = leaves[i];
      bool splittable = r.w >= 2 * kMinRoomDim + 1 || r.h >= 2 * kMinRoomDim + 1;
      int area = r.w * r.h;
      if (splittable && area > best_area) {
        best_area = area;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) return false;
    Rect r = leaves[static_cast<size_t>(best)];
    bool can_v = r.w >= 2 * kMinRoomDim + 1;
    bool can_h = r.h >= 2 * kMinRoomDim + 1;
    bool vertical = can_v && (!can_h || (r.w > r.h || (r.w == r.h && rng.uniform() < 0.5)));
    Rect a = r, b = r;
    if (vertical) {
      int s = rng.uniform_int(kMinRoomDim, r.w - 1 - kMinRoomDim);
      a.w = s;
      b.x = r.x + s + 1;
      b.w = r.w - s - 1;
    } else {
      int s = rng.uniform_int(kMinRoomDim, r.h - 1 - kMinRoomDim);
      a.h = s;
      b.y = r.y + s + 1;
      b.h = r.h - s - 1;
    }
    leaves[static_cast<size_t>(best)] = a;
    leaves.push_back(b);
  }

  out = HousePlan{};
  out.width = W;
  out.height = H;
  out.domain = domain;
  out.seed = seed;
  out.grid.assign(static_cast<size_t>(W) * H, Cell::Wall);
  for (const Rect& r : leaves) {
    out.rooms.push_back({r.x, r.y, r.w, r.h, RoomType::Corridor});
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) out.grid[static_cast<size_t>(y) * W + x] = Cell::Floor;
  }

  // candidate doors along shared wall segments
  int n = static_cast<int>(out.rooms.size());
  std::vector<EdgeCand> cands;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Room& a = out.rooms[static_cast<size_t>(i)];
      const Room& b = out.rooms[static_cast<size_t>(j)];
      EdgeCand e{i, j, {}};
      if (b.x == a.x + a.w + 1 || a.x == b.x + b.w + 1) {
        int wall_x = b.x == a.x + a.w + 1 ? a.x + a.w : b.x + b.w;
        int y0 = std::max(a.y, b.y), y1 = std::min(a.y + a.h, b.y + b.h);
        for (int y = y0; y < y1; ++y) e.cells.emplace_back(wall_x, y);
      } else if (b.y == a.y + a.h + 1 || a.y == b.y + b.h + 1) {
        int wall_y = b.y == a.y + a.h + 1 ? a.y + a.h : b.y + b.h;
        int x0 = std::max(a.x, b.x), x1 = std::min(a.x + a.w, b.x + b.w);
        for (int x = x0; x < x1; ++x) e.cells.emplace_back(x, wall_y);
      }
      if (!e.cells.empty()) cands.push_back(std::move(e));
    }

  // spanning tree first, then extra doors for the real domain's cycles
  std::vector<int> order(cands.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  rng.shuffle(order);
  UnionFind uf(n);
  std::vector<int> tree, extra;
  for (int idx : order) {
    if (uf.unite(cands[static_cast<size_t>(idx)].a, cands[static_cast<size_t>(idx)].b))
      tree.push_back(idx);
    else
      extra.push_back(idx);
  }
  if (static_cast<int>(tree.size()) != n - 1) return false;  // disconnected partition

  std::vector<int> chosen = tree;
  if (domain == Domain::Real) {
    if (extra.empty()) return false;
    int want = rng.uniform_int(1, std::min(2, static_cast<int>(extra.size())));
    for (int k = 0; k < want; ++k) chosen.push_back(extra[static_cast<size_t>(k)]);
  }

  for (int idx : chosen) {
    const EdgeCand& e = cands[static_cast<size_t>(idx)];
    int n_cells = static_cast<int>(e.cells.size());
    int pick = rng.uniform_int(0, n_cells - 1);
    auto [cx, cy] = e.cells[static_cast<size_t>(pick)];
    Door door{e.a, e.b, cx, cy};
    // doors are two cells (1 m) wide when the shared wall allows it
    int second = pick + 1 < n_cells ? pick + 1 : pick - 1;
    if (second >= 0) {
      auto [cx2, cy2] = e.cells[static_cast<size_t>(second)];
      door.cx2 = cx2;
      door.cy2 = cy2;
      out.grid[static_cast<size_t>(cy2) * W + cx2] = Cell::Floor;
    }
    out.grid[static_cast<size_t>(cy) * W + cx] = Cell::Floor;
    out.doors.push_back(door);
  }

  // room types over the spanning tree: bathrooms hang off bedrooms, kitchens
  // off living rooms, so the navigation priors hold by construction
  std::vector<std::vector<int>> tree_adj(static_cast<size_t>(n));
  for (int idx : tree) {
    tree_adj[static_cast<size_t>(cands[static_cast<size_t>(idx)].a)].push_back(cands[static_cast<size_t>(idx)].b);
    tree_adj[static_cast<size_t>(cands[static_cast<size_t>(idx)].b)].push_back(cands[static_cast<size_t>(idx)].a);
  }
  int root = rng.uniform_int(0, n - 1);
  std::vector<int> bfs{root};
  std::vector<bool> seen(static_cast<size_t>(n), false);
  seen[static_cast<size_t>(root)] = true;
  out.rooms[static_cast<size_t>(root)].type = RoomType::LivingRoom;
  for (size_t qi = 0; qi < bfs.size(); ++qi) {
    int cur = bfs[qi];
    RoomType pt = out.rooms[static_cast<size_t>(cur)].type;
    for (int nb : tree_adj[static_cast<size_t>(cur)]) {
      if (seen[static_cast<size_t>(nb)]) continue;
      seen[static_cast<size_t>(nb)] = true;
      std::vector<RoomType> menu;
      switch (pt) {
        case RoomType::LivingRoom: menu = {RoomType::Kitchen, RoomType::Bedroom, RoomType::Corridor}; break;
        case RoomType::Bedroom: menu = {RoomType::Bathroom, RoomType::Corridor, RoomType::Bedroom}; break;
        case RoomType::Kitchen: menu = {RoomType::Bedroom, RoomType::Corridor}; break;
        case RoomType::Bathroom: menu = {RoomType::Corridor, RoomType::Bedroom}; break;
        case RoomType::Corridor: menu = {RoomType::Bedroom, RoomType::LivingRoom, RoomType::Corridor}; break;
      }
      out.rooms[static_cast<size_t>(nb)].type = menu[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(menu.size()) - 1))];
      bfs.push_back(nb);
    }
  }

  out.rebuild_room_of();
  return true;
}

}  // namespace

HousePlan generate_house(Domain domain, uint64_t seed) {
  for (uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(hash2(hash2(seed, static_cast<uint64_t>(domain) + 7919), attempt));
    HousePlan plan;
    if (try_generate(domain, seed, rng, plan)) return plan;
  }
  throw std::runtime_error("generate_house: 100 attempts failed (bad size parameters)");
}

}  // namespace jrt
