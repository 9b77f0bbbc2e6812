#pragma once

#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "doctest.h"

#include "infodist/entropy_model.hpp"
#include "infodist/error.hpp"

// Checks that `expr` throws infodist::Error with the given code.
#define CHECK_ERRC(expr, errc)                                              \
  do {                                                                      \
    bool thrown_ = false;                                                   \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const infodist::Error& e_) {                                   \
      thrown_ = true;                                                       \
      CHECK_MESSAGE(e_.code() == (errc), "got " << infodist::errc_name(e_.code()) \
                                                << ": " << std::string(e_.what())); \
    }                                                                       \
    CHECK_MESSAGE(thrown_, "expected " << infodist::errc_name(errc));       \
  } while (0)

inline std::string read_data(const std::string& name) {
  std::ifstream in(std::string(INFODIST_TEST_DATA) + "/" + name, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing fixture " << name);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline infodist::Tokens bytes_of(std::string_view s) {
  return infodist::Tokens(reinterpret_cast<const unsigned char*>(s.data()),
                          reinterpret_cast<const unsigned char*>(s.data()) + s.size());
}

inline infodist::Tokens random_tokens(std::mt19937_64& rng, std::size_t n, std::uint32_t range) {
  std::uniform_int_distribution<std::uint32_t> d(0, range - 1);
  infodist::Tokens t(n);
  for (auto& x : t) x = d(rng);
  return t;
}

// {a, b, EOS} with ids 0, 1, 2.
inline constexpr infodist::Vocabulary kAbVocab{3, 2};
