#ifndef ROTSPEC_VERSION_HPP
#define ROTSPEC_VERSION_HPP

namespace rotspec {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
