#include <doctest.h>

TEST_SUITE_BEGIN("model-io");
TEST_SUITE_END();
