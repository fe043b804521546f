#include <stdio.h>
#include <string.h>

#define MAX_PARTS 4

static int split(char *s, char sep, char **parts, int max) {
  int count = 0;
  parts[count++] = s;
  for (char *p = s; *p; p++) {
    if (*p == sep) {
      *p = 0;
      if (count == max)
        break;
      parts[count++] = p + 1;
    }
  }
  return count;
}

int main(void) {
  char buf[256] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  if (n > 0 && buf[n - 1] == '\n')
    buf[n - 1] = 0;
  char *parts[MAX_PARTS];
  int count = split(buf, ':', parts, MAX_PARTS);
  if (count != 3)
    return 1;
  if (strcmp(parts[0], "admin") == 0) {
    if (strcmp(parts[1], "run") == 0) {
      printf("running %s\n", parts[2]);
      return 0;
    }
    return 2;
  }
  return 3;
}
