#include "lpcm/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace lpcm::simd {

namespace {

bool cpu_has_avx2()
{
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Level initial_level()
{
    Level level = detected_level();
    if (const char* env = std::getenv("LPCM_SIMD"); env != nullptr && *env != '\0') {
        const Level wanted = parse_level(env);
        if (wanted < level) level = wanted;
    }
    return level;
}

std::atomic<Level>& current()
{
    static std::atomic<Level> level{initial_level()};
    return level;
}

} // namespace

std::string to_string(Level level)
{
    return level == Level::Avx2 ? "avx2" : "scalar";
}

Level parse_level(const std::string& name)
{
    if (name == "scalar") return Level::Scalar;
    if (name == "avx2") return Level::Avx2;
    throw std::invalid_argument("unknown SIMD level '" + name + "'");
}

Level detected_level()
{
    if (detail::avx2_table() != nullptr && cpu_has_avx2()) return Level::Avx2;
    return Level::Scalar;
}

Level active_level()
{
    return current().load(std::memory_order_relaxed);
}

Level set_active_level(Level level)
{
    if (level > detected_level()) level = detected_level();
    current().store(level, std::memory_order_relaxed);
    return level;
}

std::vector<Level> available_levels()
{
    std::vector<Level> levels{Level::Scalar};
    if (detected_level() == Level::Avx2) levels.push_back(Level::Avx2);
    return levels;
}

const KernelTable& kernels(Level level)
{
    if (level == Level::Avx2 && detected_level() == Level::Avx2) return *detail::avx2_table();
    return detail::scalar_table();
}

const KernelTable& kernels()
{
    return kernels(active_level());
}

} // namespace lpcm::simd
