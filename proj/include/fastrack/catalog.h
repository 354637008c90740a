#ifndef FASTRACK_CATALOG_H_
#define FASTRACK_CATALOG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fastrack/relsys.h"

namespace fastrack {

// One independent block of a decomposable relative system. The index lists
// map the block's own state/input components into the full system.
struct Subsystem {
  std::string name;
  RelativeSystem system;
  std::vector<std::size_t> state_dims;
  std::vector<std::size_t> control_dims;
  std::vector<std::size_t> planning_control_dims;
  std::vector<std::size_t> disturbance_dims;
};

struct ModelInstance {
  std::string name;
  std::map<std::string, double> params;
  RelativeSystem system;
  // Empty when the pair has no decomposition.
  std::vector<Subsystem> subsystems;

  // "name;key=value;..." with keys sorted and values printed round-trip exact.
  std::string CanonicalParams() const;
};

// Catalog names: rel1d, dint2d, car5d_car3d, quad10d_int3d, quad8d_int4d.
const std::vector<std::string>& CatalogNames();

// Default parameter set for a catalog entry; kNotFound for unknown names.
std::map<std::string, double> DefaultParams(const std::string& name);

// Builds a model pair with defaults replaced by `overrides`. Unknown names
// raise kNotFound; unknown keys or invalid boxes raise kInvalidArgument.
ModelInstance make_model(const std::string& name,
                         const std::map<std::string, double>& overrides = {});

// 64-bit FNV-1a.
std::uint64_t Fnv1a(const void* data, std::size_t size,
                    std::uint64_t seed = 14695981039346656037ull);
std::uint64_t Fnv1a(const std::string& s);

}  // namespace fastrack

#endif  // FASTRACK_CATALOG_H_
