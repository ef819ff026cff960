#pragma once

#include <gtest/gtest.h>

#include "kmax/core.hpp"

// Expects `stmt` to throw kmax::Error carrying `expected_code`.
#define EXPECT_KMAX_ERROR(stmt, expected_code)                                  \
  do {                                                                          \
    bool thrown_ = false;                                                       \
    try {                                                                       \
      stmt;                                                                     \
    } catch (const ::kmax::Error& e_) {                                         \
      thrown_ = true;                                                           \
      EXPECT_EQ(::kmax::to_string(e_.code()), ::kmax::to_string(expected_code)) \
          << e_.what();                                                         \
    }                                                                           \
    EXPECT_TRUE(thrown_) << #stmt " did not throw";                             \
  } while (0)
