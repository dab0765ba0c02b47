#pragma once

namespace binpack {

inline constexpr const char* kArtifactName = "binpack";
inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace binpack
