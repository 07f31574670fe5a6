#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace adaphrase {

// Dense ids, one space per word class. Nouns cover subjects, objects and
// prepositional arguments.
enum class NounId : std::uint32_t {};
enum class VerbId : std::uint32_t {};
enum class PrepId : std::uint32_t {};
enum class PhraseId : std::uint32_t {};

template <class Id>
constexpr std::size_t index_of(Id id) noexcept {
  return static_cast<std::size_t>(id);
}

template <class Id>
constexpr Id make_id(std::size_t index) noexcept {
  return static_cast<Id>(static_cast<std::uint32_t>(index));
}

struct SvoTuple {
  NounId subject{};
  VerbId verb{};
  NounId object{};

  friend bool operator==(const SvoTuple&, const SvoTuple&) = default;
};

struct SvopnTuple {
  SvoTuple head{};
  PrepId prep{};
  NounId noun{};

  friend bool operator==(const SvopnTuple&, const SvopnTuple&) = default;
};

enum class Split : std::uint8_t { Train = 0, Dev = 1, Test = 2 };

// Packs a verb-object pair into a single hashable key.
constexpr std::uint64_t pair_key(VerbId verb, NounId object) noexcept {
  return (static_cast<std::uint64_t>(verb) << 32) | static_cast<std::uint64_t>(object);
}

constexpr VerbId key_verb(std::uint64_t key) noexcept {
  return static_cast<VerbId>(static_cast<std::uint32_t>(key >> 32));
}

constexpr NounId key_object(std::uint64_t key) noexcept {
  return static_cast<NounId>(static_cast<std::uint32_t>(key & 0xffffffffu));
}

}  // namespace adaphrase
