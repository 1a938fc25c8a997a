#include "scto/simd.hpp"

#include <cstdlib>
#include <stdexcept>

namespace scto::simd {
namespace {

enum class Backend { Auto, Scalar, Avx2 };

Backend g_forced = Backend::Auto;

Backend env_backend() {
    const char* env = std::getenv("SCTO_SIMD");
    if (!env) return Backend::Auto;
    std::string s(env);
    if (s == "scalar") return Backend::Scalar;
    if (s == "avx2") return Backend::Avx2;
    return Backend::Auto;
}

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend resolve() {
    Backend b = g_forced != Backend::Auto ? g_forced : env_backend();
    if (b == Backend::Auto) b = cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
    if (b == Backend::Avx2 && !cpu_has_avx2())
        throw std::runtime_error("SCTO_SIMD=avx2 requested but CPU lacks AVX2");
    return b;
}

}  // namespace

const Kernels& active() {
    return resolve() == Backend::Avx2 ? avx2_kernels() : scalar_kernels();
}

const char* active_name() {
    return resolve() == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(const std::string& name) {
    if (name == "auto")
        g_forced = Backend::Auto;
    else if (name == "scalar")
        g_forced = Backend::Scalar;
    else if (name == "avx2")
        g_forced = Backend::Avx2;
    else
        throw std::runtime_error("unknown simd backend: " + name);
}

}  // namespace scto::simd
