#include <stdio.h>
#include <string.h>

static int weight(const char *s) {
  int w = 0;
  while (*s) {
    w += *s;
    s++;
  }
  return w;
}

int main(void) {
  char buf[32] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  int w = weight(buf);
  int first = buf[0];
  int last = n ? buf[n - 1] : 0;
  puts("checking");
  if (n > 3)
    puts("long");
  if (first == last &&
      w > 300)
    return 1;
  return 0;
}
