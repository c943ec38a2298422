#include "osmosis/simd/kernels.hpp"

#include <atomic>

namespace osmosis::kernels {
namespace {

const Ops* widest_supported() {
  if (const Ops* t = avx2_ops()) return t;
  if (const Ops* t = neon_ops()) return t;
  return &scalar_ops();
}

std::atomic<const Ops*>& selection() {
  static std::atomic<const Ops*> current{widest_supported()};
  return current;
}

}  // namespace

const Ops& active() { return *selection().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const Ops* next = nullptr;
  if (name == "auto") {
    next = widest_supported();
  } else if (name == "scalar") {
    next = &scalar_ops();
  } else if (name == "avx2") {
    next = avx2_ops();
  } else if (name == "neon") {
    next = neon_ops();
  }
  if (!next) return false;
  selection().store(next, std::memory_order_relaxed);
  return true;
}

std::vector<std::string> available() {
  std::vector<std::string> names;
  if (const Ops* t = avx2_ops()) names.emplace_back(t->name);
  if (const Ops* t = neon_ops()) names.emplace_back(t->name);
  names.emplace_back(scalar_ops().name);
  return names;
}

}  // namespace osmosis::kernels
