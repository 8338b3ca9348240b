package main

import (
	"bufio"
	"fmt"
	"os"
	"strings"

	"example.com/kv/store"
)

func main() {
	s := store.New()
	scanner := bufio.NewScanner(os.Stdin)
	for scanner.Scan() {
		fields := strings.Fields(scanner.Text())
		if len(fields) == 0 {
			continue
		}
		switch fields[0] {
		case "put":
			if len(fields) != 3 {
				fmt.Fprintln(os.Stderr, "usage: put KEY VALUE")
				continue
			}
			s.Put(fields[1], fields[2])
		case "get":
			v, err := s.Get(fields[1])
			if err != nil {
				fmt.Println("(missing)")
				continue
			}
			fmt.Println(v)
		default:
			fmt.Fprintf(os.Stderr, "unknown command %q\n", fields[0])
		}
	}
}
