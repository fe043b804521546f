#include <stdint.h>
#include <stdio.h>

static uint32_t load_le32(const unsigned char *p) {
  return (uint32_t)p[0] | ((uint32_t)p[1] << 8) | ((uint32_t)p[2] << 16) |
         ((uint32_t)p[3] << 24);
}

int main(void) {
  unsigned char buf[16] = {0};
  size_t n = fread(buf, 1, sizeof(buf), stdin);
  if (n < 4)
    return 1;
  uint32_t v = load_le32(buf);
  if (v * 5u == 0xA5A5A5A5u) {
    puts("product hit");
    return 0;
  }
  return 2;
}
