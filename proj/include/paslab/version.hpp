#ifndef PASLAB_VERSION_HPP
#define PASLAB_VERSION_HPP

namespace paslab {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
