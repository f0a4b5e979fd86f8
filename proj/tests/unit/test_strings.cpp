#include <doctest.h>

#include "reflab/support/sha256.hpp"
#include "reflab/support/strings.hpp"

using namespace reflab;

TEST_CASE("normalize_type_name canonicalizes case, whitespace, underscores") {
    CHECK(strings::normalize_type_name("Extract Variable") == "EXTRACT VARIABLE");
    CHECK(strings::normalize_type_name("EXTRACT VARIABLE") == "EXTRACT VARIABLE");
    CHECK(strings::normalize_type_name("extract_variable") == "EXTRACT VARIABLE");
    CHECK(strings::normalize_type_name("  Extract \t Variable ") == "EXTRACT VARIABLE");
    CHECK(strings::normalize_type_name("") == "");
    CHECK(strings::normalize_type_name("___") == "");
}

TEST_CASE("trim strips surrounding whitespace only") {
    CHECK(strings::trim("  a b  ") == "a b");
    CHECK(strings::trim("\n1\r\n") == "1");
    CHECK(strings::trim("") == "");
}

TEST_CASE("split_lines handles trailing newline without a phantom line") {
    CHECK(strings::split_lines("a\nb\n").size() == 2);
    CHECK(strings::split_lines("a\nb").size() == 2);
    CHECK(strings::split_lines("").size() == 1);
    CHECK(strings::split_lines("a\r\nb\r\n")[0] == "a");
}

TEST_CASE("replace_all replaces every occurrence") {
    CHECK(strings::replace_all("$<x>$ and $<x>$", "$<x>$", "Y") == "Y and Y");
    CHECK(strings::replace_all("abc", "q", "z") == "abc");
}

TEST_CASE("sha256_hex matches the published empty-string and abc digests") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
