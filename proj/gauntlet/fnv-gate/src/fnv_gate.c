#include <stdint.h>
#include <stdio.h>

#define FNV_OFFSET 0xcbf29ce484222325ULL
#define FNV_PRIME 0x100000001b3ULL
/* FNV-1a of the unlock phrase */
#define GATE 0x38571bd4622717c3ULL

static uint64_t fnv1a(const unsigned char *p, size_t n) {
  uint64_t h = FNV_OFFSET;
  for (size_t i = 0; i < n; i++) {
    h ^= p[i];
    h *= FNV_PRIME;
  }
  return h;
}

int main(void) {
  unsigned char buf[256];
  size_t n = fread(buf, 1, sizeof(buf), stdin);
  if (n < 8)
    return 1;
  uint64_t h = fnv1a(buf, n);
  if (h == GATE) {
    puts("gate open");
    return 0;
  }
  return 2;
}
