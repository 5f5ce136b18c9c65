#pragma once

#include <atomic>
#include <concepts>
#include <cstdint>

namespace lpmap {

/// new value = fn(key, current value, argument). Must be pure: it is
/// re-evaluated whenever the compare-exchange loses a race.
template <class F>
concept UpdateFunction = requires(const F& fn, std::uint64_t key, std::uint64_t current, std::uint64_t arg) {
  { fn(key, current, arg) } -> std::convertible_to<std::uint64_t>;
};

/// Update functions that can also be applied with a single-word atomic
/// instruction. Only used where no concurrent cell marking can happen.
template <class F>
concept WordUpdateFunction = UpdateFunction<F> && requires(std::atomic_ref<std::uint64_t> word, std::uint64_t arg) {
  F::apply_to_word(word, arg);
};

struct Overwrite {
  constexpr std::uint64_t operator()(std::uint64_t, std::uint64_t, std::uint64_t arg) const noexcept { return arg; }
  static void apply_to_word(std::atomic_ref<std::uint64_t> word, std::uint64_t arg) noexcept {
    word.store(arg, std::memory_order_release);
  }
};

struct Add {
  constexpr std::uint64_t operator()(std::uint64_t, std::uint64_t current, std::uint64_t arg) const noexcept {
    return current + arg;
  }
  static void apply_to_word(std::atomic_ref<std::uint64_t> word, std::uint64_t arg) noexcept {
    word.fetch_add(arg, std::memory_order_acq_rel);
  }
};

}  // namespace lpmap
